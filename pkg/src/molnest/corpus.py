"""Synthetic open-corpus generation.

There is no bundled compound database, so the "open data" role is played
by molecules sampled through the codec's robustness guarantee: draw random
token sequences, decode them to valid molecules, re-encode the clean
SELFIES, and deduplicate on canonical SMILES. The sampler's token weights
are part of the corpus distribution and are kept in one place so the
frozen fragment-score table is built against the same population.
"""

from __future__ import annotations

import numpy as np

from .chem.graph import canonical_smiles, write_smiles
from .chem.selfies import decode_selfies, encode_mol, smiles_to_selfies, split_selfies

__all__ = [
    "DEFAULT_TOKEN_WEIGHTS",
    "random_molecule",
    "synthesize_corpus",
    "read_corpus",
    "write_corpus",
]

DEFAULT_TOKEN_WEIGHTS = {
    "[C]": 30.0, "[=C]": 6.0, "[#C]": 1.0,
    "[N]": 8.0, "[=N]": 2.0, "[#N]": 0.5,
    "[O]": 10.0, "[=O]": 4.0,
    "[S]": 2.0, "[=S]": 0.5, "[P]": 0.7,
    "[F]": 3.0, "[Cl]": 2.0, "[Br]": 1.0, "[I]": 0.3,
    "[Ring1]": 6.0, "[Ring2]": 1.0, "[=Ring1]": 1.0, "[=Ring2]": 0.2,
    "[Branch1_1]": 6.0, "[Branch1_2]": 1.5, "[Branch1_3]": 0.3,
    "[Branch2_1]": 0.3, "[Branch2_2]": 0.1, "[Branch2_3]": 0.05,
}


def random_molecule(
    rng: np.random.Generator,
    min_tokens: int = 4,
    max_tokens: int = 16,
    min_atoms: int = 3,
    max_selfies_tokens: int = 22,
    weights: dict[str, float] = DEFAULT_TOKEN_WEIGHTS,
):
    """One random molecule as (selfies, canonical_smiles), or None on a draw
    that is too small or does not fit the token budget after re-encoding."""
    tokens = list(weights)
    p = np.array(list(weights.values()))
    p /= p.sum()
    length = int(rng.integers(min_tokens, max_tokens + 1))
    seq = [tokens[i] for i in rng.choice(len(tokens), size=length, p=p)]
    mol = decode_selfies(seq)
    if mol.num_atoms() < min_atoms:
        return None
    encoded = encode_mol(mol)
    if len(encoded) > max_selfies_tokens:
        return None
    return "".join(encoded), canonical_smiles(mol)


def synthesize_corpus(n: int, seed: int, **kwargs) -> list[str]:
    """n distinct molecules (canonical-SMILES dedup), as SELFIES strings."""
    rng = np.random.default_rng(seed)
    seen: set[str] = set()
    out: list[str] = []
    attempts = 0
    limit = 200 * n + 10000
    while len(out) < n:
        attempts += 1
        if attempts > limit:
            raise RuntimeError(f"corpus sampler stalled after {attempts} attempts")
        got = random_molecule(rng, **kwargs)
        if got is None:
            continue
        selfies, canon = got
        if canon in seen:
            continue
        seen.add(canon)
        out.append(selfies)
    return out


def write_corpus(path, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def read_corpus(path) -> list[str]:
    """One molecule per line; SMILES lines are converted to SELFIES."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("["):
                split_selfies(line)  # validates bracket structure
                out.append(line)
            else:
                out.append(smiles_to_selfies(line))
    return out
