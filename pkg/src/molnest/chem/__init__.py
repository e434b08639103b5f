from .graph import Mol, SmilesError, canonical_smiles, is_valid_smiles, parse_smiles, write_smiles
from .selfies import SelfiesError, selfies_to_smiles, smiles_to_selfies, split_selfies

__all__ = [
    "Mol",
    "SmilesError",
    "SelfiesError",
    "canonical_smiles",
    "is_valid_smiles",
    "parse_smiles",
    "write_smiles",
    "selfies_to_smiles",
    "smiles_to_selfies",
    "split_selfies",
]
