"""Nested two-VAE molecular generator with a correlation-steered latent dimension."""

__version__ = "0.1.0"
