"""Synthesis-difficulty scoring and the pluggable property oracle.

The score follows the fragment-contribution-plus-complexity recipe of
Ertl and Schuffenhauer (J. Cheminf. 1:8, 2009): a per-atom commonness term
from a frequency table of circular environments, minus size, spiro,
bridgehead and macrocycle penalties, plus a fingerprint-density
correction, affinely rescaled to [1, 10] with logarithmic smoothing above
8. The frequency table and scale constants are frozen package data built
from a seeded reference sample (scripts/build_fragment_scores.py);
environments absent from the table contribute the unknown score, so novel
motifs read as hard to make.
"""

from __future__ import annotations

import gzip
import json
import math
import os
import threading
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .chem.fingerprint import atom_environments
from .chem.graph import Mol, SmilesError, canonical_smiles, parse_smiles

__all__ = [
    "PropertyOracle",
    "ScoreResult",
    "ScoreCache",
    "OracleError",
    "sa_score",
    "sa_oracle",
    "batch_score",
    "ring_features",
]

_DATA_PATH = os.path.join(os.path.dirname(__file__), "data", "fragment_scores.json.gz")
_TABLE = None
_TABLE_LOCK = threading.Lock()


class OracleError(ValueError):
    pass


def _load_table():
    global _TABLE
    with _TABLE_LOCK:
        if _TABLE is None:
            with gzip.open(_DATA_PATH, "rt", encoding="utf-8") as fh:
                raw = json.load(fh)
            raw["scores"] = {int(k): v for k, v in raw["scores"].items()}
            _TABLE = raw
    return _TABLE


def ring_features(mol: Mol) -> dict[str, int]:
    """Ring-system counts feeding the complexity penalties."""
    rings = mol.ring_atom_sets()
    n_macro = sum(1 for r in rings if len(r) > 8)
    spiro: set[int] = set()
    bridge: set[int] = set()
    for a in range(len(rings)):
        for b in range(a + 1, len(rings)):
            shared = rings[a] & rings[b]
            if len(shared) == 1:
                spiro.update(shared)
            elif len(shared) >= 3:
                # endpoints of the shared path have one in-path neighbor
                for atom in shared:
                    inside = sum(1 for j in mol.neighbors[atom] if j in shared)
                    if inside == 1:
                        bridge.add(atom)
    return {
        "n_rings": len(rings),
        "n_macrocycles": n_macro,
        "n_spiro": len(spiro),
        "n_bridgeheads": len(bridge),
    }


def _raw_complexity(mol: Mol, table) -> float:
    envs = atom_environments(mol, radius=table["radius"])
    counts: dict[int, int] = {}
    for e in envs:
        counts[e] = counts.get(e, 0) + 1
    scores = table["scores"]
    unknown = table["unknown_score"]
    total = 0
    frag = 0.0
    for env, c in counts.items():
        frag += scores.get(env, unknown) * c
        total += c
    frag /= total

    n_atoms = mol.num_atoms()
    feats = ring_features(mol)
    size_penalty = n_atoms ** 1.005 - n_atoms
    spiro_penalty = math.log10(feats["n_spiro"] + 1)
    bridge_penalty = math.log10(feats["n_bridgeheads"] + 1)
    penalty = size_penalty + spiro_penalty + bridge_penalty
    if feats["n_macrocycles"] > 0:
        penalty += math.log10(2)

    density = 0.0
    if n_atoms > len(counts):
        density = math.log(float(n_atoms) / len(counts)) * 0.5
    return frag - penalty + density


def sa_score(smiles: str) -> float:
    """Deterministic synthesis-difficulty score in [1, 10] (1 easy, 10 hard).

    The caller must pass a structurally valid SMILES; anything that fails
    to parse or breaks valence raises OracleError.
    """
    try:
        mol = parse_smiles(smiles)
    except SmilesError as exc:
        raise OracleError(f"cannot score invalid structure {smiles!r}: {exc}") from exc
    if not mol.all_valences_ok():
        raise OracleError(f"cannot score invalid structure {smiles!r}: valence violation")
    if not mol.is_connected():
        raise OracleError(f"cannot score disconnected structure {smiles!r}")
    table = _load_table()
    raw = _raw_complexity(mol, table)
    lo, hi = table["scale_lo"], table["scale_hi"]
    score = 11.0 - (raw - lo + 1.0) / (hi - lo) * 9.0
    if score > 8.0:
        score = 8.0 + math.log(score + 1.0 - 9.0)
    return float(min(10.0, max(1.0, score)))


@dataclass(frozen=True)
class PropertyOracle:
    name: str
    range: tuple[float, float]
    evaluate: Callable[[str], float]


def sa_oracle() -> PropertyOracle:
    return PropertyOracle(name="sa_score", range=(1.0, 10.0), evaluate=sa_score)


class ScoreResult(NamedTuple):
    smiles: str
    score: float | None
    error: str | None


def batch_score(oracle: PropertyOracle, smiles_list) -> list[ScoreResult]:
    """Score each item, isolating per-item failures."""
    out = []
    for s in smiles_list:
        try:
            out.append(ScoreResult(s, oracle.evaluate(s), None))
        except Exception as exc:  # noqa: BLE001 - per-item isolation is the contract
            out.append(ScoreResult(s, None, str(exc)))
    return out


@dataclass
class ScoreCache:
    """Append-only file cache keyed by canonical SMILES (single writer)."""

    path: str
    oracle: PropertyOracle
    _memory: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if os.path.exists(self.path):
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    key, value = line.rstrip("\n").split("\t")
                    self._memory[key] = float(value)

    def score(self, smiles: str) -> float:
        key = canonical_smiles(smiles)
        if key in self._memory:
            return self._memory[key]
        value = self.oracle.evaluate(key)
        self._memory[key] = value
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(f"{key}\t{value!r}\n")
        return value
