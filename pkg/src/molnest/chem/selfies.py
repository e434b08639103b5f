"""Robust molecular string codec (SELFIES dialect, 2020-lineage rules).

Every token sequence over the alphabet derives some valence-correct
molecule: bond orders are capped by the remaining valence of both
endpoints, out-of-context ring/branch tokens are skipped, and derivation
stops when the chain atom has no free valence left. Encoding is a
deterministic DFS that the decoder inverts exactly, so
decode(encode(mol)) reproduces the molecular graph.

Dialect summary (rule set "mn-1", pinned in checkpoints):
- Atom tokens [C] [=C] [#C] ... create an atom bonded to the current one
  with order min(prefix, free valence of both ends). The prefix of the
  very first atom (of the string or of a branch) is ignored.
- [RingQ]/[=RingQ] (Q in {1,2}) read Q operand tokens encoding a number
  via INDEX_ORDER (base 16) and close a ring to the atom that many steps
  back in creation order, clipped to the first atom.
- [BranchL_T] (L in {1,2}, T in {1,2,3}) reads L operand tokens giving a
  number n, then derives the next n+1 tokens as a branch attached to the
  current atom with bond order T. Derivation resumes at the current atom.
- Operand tokens are always consumed when present; a sequence ending
  inside an operator's operands just stops.
"""

from __future__ import annotations

import re

from .graph import ALLOWED_VALENCES, Atom, Mol, max_valence, parse_smiles, write_smiles

__all__ = [
    "ALPHABET",
    "INDEX_ORDER",
    "SelfiesError",
    "split_selfies",
    "decode_selfies",
    "encode_mol",
    "selfies_to_smiles",
    "smiles_to_selfies",
]


class SelfiesError(ValueError):
    """Raised for malformed token strings or graphs outside the dialect."""


_ATOM_TOKENS = {}
for _el in ("C", "N", "O", "S", "P", "F", "Cl", "Br", "I"):
    _ATOM_TOKENS[f"[{_el}]"] = (1, _el)
for _el in ("C", "N", "O", "S", "P"):
    _ATOM_TOKENS[f"[={_el}]"] = (2, _el)
for _el in ("C", "N", "S", "P"):
    _ATOM_TOKENS[f"[#{_el}]"] = (3, _el)

_RING_TOKENS = {
    "[Ring1]": (1, 1),
    "[Ring2]": (2, 1),
    "[=Ring1]": (1, 2),
    "[=Ring2]": (2, 2),
    "[#Ring1]": (1, 3),
    "[#Ring2]": (2, 3),
}

_BRANCH_TOKENS = {
    f"[Branch{length}_{order}]": (length, order)
    for length in (1, 2)
    for order in (1, 2, 3)
}

ALPHABET = tuple(_ATOM_TOKENS) + tuple(_RING_TOKENS) + tuple(_BRANCH_TOKENS)

# Operand value of a token when it follows a ring/branch token (base-16
# digit). Tokens outside this list count as 0.
INDEX_ORDER = (
    "[C]", "[Ring1]", "[Ring2]", "[Branch1_1]", "[Branch1_2]", "[Branch1_3]",
    "[O]", "[N]", "[=N]", "[=C]", "[#C]", "[S]", "[P]", "[#N]", "[=S]", "[=O]",
)
_INDEX_OF = {tok: i for i, tok in enumerate(INDEX_ORDER)}

_TOKEN_SPLIT_RE = re.compile(r"\[[^\[\]]*\]")


def split_selfies(selfies: str) -> list[str]:
    """Split a SELFIES string into [...] tokens.

    Checks bracket structure only; unknown-but-well-formed tokens are
    returned as-is (vocabulary policy lives upstream).
    """
    tokens = _TOKEN_SPLIT_RE.findall(selfies)
    if "".join(tokens) != selfies:
        raise SelfiesError(f"malformed SELFIES (unbalanced brackets): {selfies!r}")
    return tokens


def _operand_value(tokens: list[str]) -> int:
    value = 0
    for tok in tokens:
        value = value * 16 + _INDEX_OF.get(tok, 0)
    return value


class _Derivation:
    def __init__(self):
        self.mol = Mol()
        self.avail: list[int] = []

    def add_atom(self, element: str) -> int:
        idx = self.mol.add_atom(Atom(element))
        self.avail.append(max_valence(element))
        return idx

    def bond(self, i: int, j: int, order: int) -> None:
        self.mol.add_bond(i, j, order)
        self.avail[i] -= order
        self.avail[j] -= order

    def derive(self, tokens: list[str], cur: int | None, forced_first_order: int | None) -> None:
        """Consume tokens, growing the molecule from atom `cur`.

        forced_first_order overrides the bond prefix of the first bond made
        here (branch attachment order). Returns when tokens run out or the
        chain dies (current atom with no free valence meets an atom token).
        """
        i = 0
        n = len(tokens)
        while i < n:
            tok = tokens[i]
            i += 1
            if tok in _ATOM_TOKENS:
                prefix, element = _ATOM_TOKENS[tok]
                if cur is None:
                    cur = self.add_atom(element)
                    forced_first_order = None
                    continue
                if self.avail[cur] <= 0:
                    return
                order = forced_first_order if forced_first_order is not None else prefix
                order = min(order, self.avail[cur], max_valence(element))
                new = self.add_atom(element)
                self.bond(cur, new, order)
                cur = new
                forced_first_order = None
            elif tok in _RING_TOKENS:
                length, req_order = _RING_TOKENS[tok]
                if i + length > n:
                    return
                value = _operand_value(tokens[i:i + length])
                i += length
                if cur is None or self.avail[cur] <= 0:
                    continue
                target = max(0, cur - (value + 1))
                if target == cur or target in self.mol.neighbors[cur]:
                    continue
                if self.avail[target] <= 0:
                    continue
                order = min(req_order, self.avail[cur], self.avail[target])
                self.bond(cur, target, order)
            elif tok in _BRANCH_TOKENS:
                length, order = _BRANCH_TOKENS[tok]
                if i + length > n:
                    return
                value = _operand_value(tokens[i:i + length])
                i += length
                if cur is None or self.avail[cur] <= 0:
                    continue
                content = tokens[i:i + value + 1]
                i += len(content)
                self.derive(content, cur, order)
            else:
                raise SelfiesError(f"unknown token {tok!r}")


def decode_selfies(selfies: str) -> Mol:
    """Derive the molecular graph; may have zero atoms for operator-only
    strings."""
    tokens = split_selfies(selfies) if isinstance(selfies, str) else list(selfies)
    d = _Derivation()
    d.derive(tokens, None, None)
    return d.mol


def selfies_to_smiles(selfies: str) -> str:
    """Decode to a SMILES string ("" when the derivation has no atoms)."""
    mol = decode_selfies(selfies)
    if mol.num_atoms() == 0:
        return ""
    return write_smiles(mol)


# ---------------------------------------------------------------------------
# encoding

_PREFIX = {1: "", 2: "=", 3: "#"}


def _atom_token(element: str, order: int) -> str:
    tok = f"[{_PREFIX[order]}{element}]"
    if tok not in _ATOM_TOKENS:
        raise SelfiesError(f"no token for {element} with bond order {order}")
    return tok


def _operand_tokens(value: int, length: int) -> list[str]:
    digits = []
    for _ in range(length):
        digits.append(INDEX_ORDER[value % 16])
        value //= 16
    if value:
        raise SelfiesError("operand overflow")
    return digits[::-1]


def _ring_tokens(distance: int, order: int) -> list[str]:
    prefix = {1: "", 2: "=", 3: "#"}[order]
    if distance < 16:
        return [f"[{prefix}Ring1]"] + _operand_tokens(distance, 1)
    if distance < 256:
        return [f"[{prefix}Ring2]"] + _operand_tokens(distance, 2)
    raise SelfiesError("ring span exceeds dialect range (255)")


def _branch_tokens(content_len: int, order: int) -> list[str]:
    if content_len - 1 < 16:
        return [f"[Branch1_{order}]"] + _operand_tokens(content_len - 1, 1)
    if content_len - 1 < 256:
        return [f"[Branch2_{order}]"] + _operand_tokens(content_len - 1, 2)
    raise SelfiesError("branch length exceeds dialect range (256)")


def encode_mol(mol: Mol) -> list[str]:
    """Encode a connected, valence-correct molecule as dialect tokens.

    DFS from atom 0 with neighbors in index order. Ring-closure tokens sit
    right after the later-visited endpoint (in undirected DFS all non-tree
    edges run to ancestors, so the closure target always exists already);
    every tree child except the last is wrapped in a branch.
    decode_selfies inverts this exactly.
    """
    n = mol.num_atoms()
    if n == 0:
        raise SelfiesError("cannot encode an empty molecule")
    if not mol.is_connected():
        raise SelfiesError("cannot encode a disconnected molecule")
    for i in range(n):
        if not mol.valence_ok(i):
            raise SelfiesError(f"atom {i} violates valence rules")

    pos: dict[int, int] = {}

    def emit(atom: int, parent: int | None, attach_order: int) -> list[str]:
        pos[atom] = len(pos)
        toks = [_atom_token(mol.atoms[atom].element, attach_order if parent is not None else 1)]
        for j in sorted(mol.neighbors[atom]):
            if j != parent and j in pos and pos[j] < pos[atom]:
                toks.extend(_ring_tokens(pos[atom] - pos[j] - 1, mol.neighbors[atom][j]))
        parts = []
        for j in sorted(mol.neighbors[atom]):
            if j == parent or j in pos:  # re-checked per child: siblings may claim j
                continue
            parts.append((mol.neighbors[atom][j], emit(j, atom, mol.neighbors[atom][j])))
        for order, body in parts[:-1]:
            toks.extend(_branch_tokens(len(body), order))
            toks.extend(body)
        if parts:
            toks.extend(parts[-1][1])
        return toks

    import sys

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 100))
    try:
        return emit(0, None, 1)
    finally:
        sys.setrecursionlimit(old_limit)


def smiles_to_selfies(smiles: str) -> str:
    """Convert a valid SMILES string to its dialect SELFIES encoding."""
    mol = parse_smiles(smiles)
    if not mol.all_valences_ok():
        raise SelfiesError(f"valence violation in {smiles!r}")
    return "".join(encode_mol(mol))
