"""Hashed circular atom environments and count fingerprints.

Environment identifiers are invariant to atom numbering (neighbor
aggregation is sorted), so two SMILES of the same molecule produce the
same hashes. Shared by the synthesis-difficulty oracle and the
fingerprint-regressor baseline.
"""

from __future__ import annotations

import struct
from hashlib import blake2b

import numpy as np

from .graph import Mol

__all__ = ["atom_environments", "count_fingerprint"]


def _mix(*values: int) -> int:
    h = blake2b(digest_size=8)
    for v in values:
        h.update(struct.pack("<Q", v & 0xFFFFFFFFFFFFFFFF))
    return int.from_bytes(h.digest(), "little", signed=False)


def _element_code(element: str) -> int:
    return int.from_bytes(element.encode("ascii").ljust(4, b"\0"), "little")


def atom_environments(mol: Mol, radius: int = 2) -> list[int]:
    """Hashes of every atom-centered environment for r = 0..radius."""
    current = [
        _mix(_element_code(a.element), len(mol.neighbors[i]), mol.bond_order_sum(i))
        for i, a in enumerate(mol.atoms)
    ]
    out = list(current)
    for _ in range(radius):
        nxt = []
        for i in range(mol.num_atoms()):
            parts = sorted((order, current[j]) for j, order in mol.neighbors[i].items())
            flat = [current[i]]
            for order, h in parts:
                flat.extend((order, h))
            nxt.append(_mix(*flat))
        current = nxt
        out.extend(current)
    return out


def count_fingerprint(mol: Mol, width: int = 2048, radius: int = 2) -> np.ndarray:
    """Fixed-width count vector of hashed circular environments."""
    fp = np.zeros(width, dtype=np.float64)
    for env in atom_environments(mol, radius):
        fp[env % width] += 1.0
    return fp
