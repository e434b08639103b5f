"""Minimal molecular graph kernel: SMILES I/O, valence rules, canonical forms.

Supports the kekulized organic subset the rest of the package emits
(B C N O P S F Cl Br I, bond orders 1..3, rings, branches) plus enough
extras to validate common external inputs: aromatic lowercase atoms with
backtracking-free kekulization via maximum matching, bracket atoms with an
explicit hydrogen count. Charges, isotopes, stereochemistry and
multi-fragment strings are out of scope and fail to parse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import networkx as nx

__all__ = [
    "Atom",
    "Mol",
    "SmilesError",
    "parse_smiles",
    "write_smiles",
    "canonical_smiles",
    "canonical_order",
    "is_valid_smiles",
]

# Allowed total valences (bond order sum + hydrogens). The smallest value
# >= the explicit bond sum is filled with implicit hydrogens, as in the
# SMILES organic-subset reading.
ALLOWED_VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
AROMATIC_OK = {"c", "n", "o", "s"}


def max_valence(element: str) -> int:
    return ALLOWED_VALENCES[element][-1]


class SmilesError(ValueError):
    """Raised for strings outside the supported SMILES subset."""


@dataclass
class Atom:
    element: str
    aromatic: bool = False
    # None means hydrogens are implicit; an int pins the count (bracket atoms).
    h_count: int | None = None


@dataclass
class Mol:
    atoms: list[Atom] = field(default_factory=list)
    # neighbors[i] maps neighbor index -> bond order (1, 2, 3)
    neighbors: list[dict[int, int]] = field(default_factory=list)

    def add_atom(self, atom: Atom) -> int:
        self.atoms.append(atom)
        self.neighbors.append({})
        return len(self.atoms) - 1

    def add_bond(self, i: int, j: int, order: int) -> None:
        if i == j or j in self.neighbors[i]:
            raise SmilesError(f"duplicate or self bond {i}-{j}")
        self.neighbors[i][j] = order
        self.neighbors[j][i] = order

    def num_atoms(self) -> int:
        return len(self.atoms)

    def bonds(self):
        for i, nbrs in enumerate(self.neighbors):
            for j, order in nbrs.items():
                if i < j:
                    yield i, j, order

    def bond_order_sum(self, i: int) -> int:
        return sum(self.neighbors[i].values())

    def valence_ok(self, i: int) -> bool:
        sums = self.bond_order_sum(i)
        allowed = ALLOWED_VALENCES.get(self.atoms[i].element)
        if allowed is None:
            return False
        h = self.atoms[i].h_count
        if h is None:
            return sums <= allowed[-1]
        return (sums + h) in allowed

    def all_valences_ok(self) -> bool:
        return all(self.valence_ok(i) for i in range(self.num_atoms()))

    def is_connected(self) -> bool:
        n = self.num_atoms()
        if n == 0:
            return False
        seen = {0}
        stack = [0]
        while stack:
            for j in self.neighbors[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    def to_nx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.num_atoms()))
        g.add_edges_from((i, j) for i, j, _ in self.bonds())
        return g

    def ring_atom_sets(self) -> list[frozenset[int]]:
        """Minimum cycle basis as atom sets (SSSR stand-in)."""
        g = self.to_nx()
        if g.number_of_edges() < g.number_of_nodes():
            # acyclic graphs short-circuit the (relatively) costly basis search
            if nx.number_connected_components(g) == g.number_of_nodes() - g.number_of_edges():
                return []
        return [frozenset(cycle) for cycle in nx.minimum_cycle_basis(g)]


_TOKEN_RE = re.compile(
    r"Cl|Br|\[[^\]]*\]|[BCNOPSFI]|[bcnos]|[=#:\-()./\\]|%\d{2}|\d"
)
_BRACKET_RE = re.compile(r"\[(?P<sym>[A-Z][a-z]?|[bcnos])(?P<h>H\d*)?\]")

_BOND_ORDER = {"-": 1, "=": 2, "#": 3}


def _tokenize_smiles(s: str):
    pos = 0
    out = []
    while pos < len(s):
        m = _TOKEN_RE.match(s, pos)
        if m is None:
            raise SmilesError(f"unexpected character {s[pos]!r} at {pos} in {s!r}")
        out.append(m.group(0))
        pos = m.end()
    return out


def _parse_bracket(tok: str) -> Atom:
    m = _BRACKET_RE.fullmatch(tok)
    if m is None:
        # charges, isotopes and stereo marks land here
        raise SmilesError(f"unsupported bracket atom {tok!r}")
    sym = m.group("sym")
    aromatic = sym.islower()
    element = sym.capitalize() if aromatic else sym
    if aromatic and sym not in AROMATIC_OK:
        raise SmilesError(f"unsupported aromatic atom {tok!r}")
    if element not in ALLOWED_VALENCES:
        raise SmilesError(f"unsupported element {tok!r}")
    h = m.group("h")
    h_count = 0 if h is None else (1 if h == "H" else int(h[1:]))
    return Atom(element, aromatic=aromatic, h_count=h_count)


def parse_smiles(smiles: str) -> Mol:
    """Parse a SMILES string into a Mol, kekulizing aromatic systems.

    Raises SmilesError for syntax outside the supported subset, unclosed
    rings/branches, or aromatic systems with no kekule assignment. Valence
    is not checked here; see is_valid_smiles.
    """
    if not smiles:
        raise SmilesError("empty SMILES")
    tokens = _tokenize_smiles(smiles)
    mol = Mol()
    prev: int | None = None
    pending_bond: int | None = None  # explicit bond symbol awaiting its atom
    pending_aromatic_bond = False
    stack: list[int] = []
    open_rings: dict[str, tuple[int, int | None, bool]] = {}
    aromatic_bonds: set[tuple[int, int]] = set()

    def close_bond(i: int, j: int, order: int | None, aromatic_mark: bool):
        both_aromatic = mol.atoms[i].aromatic and mol.atoms[j].aromatic
        if order is None and (both_aromatic or aromatic_mark):
            mol.add_bond(i, j, 1)
            aromatic_bonds.add((min(i, j), max(i, j)))
        else:
            mol.add_bond(i, j, order if order is not None else 1)

    for tok in tokens:
        if tok == ".":
            raise SmilesError("multi-fragment SMILES not supported")
        if tok in ("/", "\\"):
            raise SmilesError("stereo bonds not supported")
        if tok in _BOND_ORDER:
            if pending_bond is not None or pending_aromatic_bond:
                raise SmilesError("two consecutive bond symbols")
            pending_bond = _BOND_ORDER[tok]
            continue
        if tok == ":":
            if pending_bond is not None:
                raise SmilesError("two consecutive bond symbols")
            pending_aromatic_bond = True
            continue
        if tok == "(":
            if prev is None:
                raise SmilesError("branch before any atom")
            stack.append(prev)
            continue
        if tok == ")":
            if not stack:
                raise SmilesError("unmatched ')'")
            if pending_bond is not None or pending_aromatic_bond:
                raise SmilesError("dangling bond before ')'")
            prev = stack.pop()
            continue
        if tok.isdigit() or tok.startswith("%"):
            if prev is None:
                raise SmilesError("ring closure before any atom")
            key = tok.lstrip("%")
            if key in open_rings:
                other, other_order, other_arom = open_rings.pop(key)
                order = pending_bond
                if order is not None and other_order is not None and order != other_order:
                    raise SmilesError(f"conflicting ring bond orders for {key}")
                order = order if order is not None else other_order
                close_bond(prev, other, order, pending_aromatic_bond or other_arom)
            else:
                open_rings[key] = (prev, pending_bond, pending_aromatic_bond)
            pending_bond = None
            pending_aromatic_bond = False
            continue
        # atom token
        if tok.startswith("["):
            atom = _parse_bracket(tok)
        elif tok in ORGANIC_SUBSET or tok in ("B",):
            atom = Atom(tok)
        elif tok in AROMATIC_OK:
            atom = Atom(tok.capitalize(), aromatic=True)
        else:
            raise SmilesError(f"unsupported token {tok!r}")
        idx = mol.add_atom(atom)
        if prev is not None:
            close_bond(prev, idx, pending_bond, pending_aromatic_bond)
        elif pending_bond is not None or pending_aromatic_bond:
            raise SmilesError("bond symbol before first atom")
        pending_bond = None
        pending_aromatic_bond = False
        prev = idx

    if stack:
        raise SmilesError("unclosed branch")
    if open_rings:
        raise SmilesError(f"unclosed ring bond(s): {sorted(open_rings)}")
    if pending_bond is not None or pending_aromatic_bond:
        raise SmilesError("dangling bond at end of string")
    if mol.num_atoms() == 0:
        raise SmilesError("no atoms")

    if aromatic_bonds:
        _kekulize(mol, aromatic_bonds)
    for atom in mol.atoms:
        atom.aromatic = False
    return mol


def _kekulize(mol: Mol, aromatic_bonds: set[tuple[int, int]]) -> None:
    """Assign double bonds to aromatic systems via maximum matching.

    Aromatic carbons and bare aromatic nitrogens need exactly one double
    bond; aromatic O/S and [nH] contribute a lone pair and need none. A
    matching that fails to cover every needs-double atom means there is no
    kekule structure in this subset.
    """
    needs_double = set()
    for i, atom in enumerate(mol.atoms):
        if not atom.aromatic:
            continue
        if atom.element == "C":
            needs_double.add(i)
        elif atom.element == "N" and not atom.h_count:
            needs_double.add(i)
        elif atom.element in ("O", "S"):
            continue
        elif atom.element == "N":
            continue
        else:
            raise SmilesError(f"cannot kekulize aromatic {atom.element}")
    g = nx.Graph()
    g.add_nodes_from(sorted(needs_double))
    for i, j in sorted(aromatic_bonds):
        if i in needs_double and j in needs_double:
            g.add_edge(i, j)
    matching = nx.max_weight_matching(g, maxcardinality=True)
    matched = set()
    for i, j in matching:
        mol.neighbors[i][j] = 2
        mol.neighbors[j][i] = 2
        matched.update((i, j))
    if matched != needs_double:
        raise SmilesError("no kekule structure found for aromatic system")


def is_valid_smiles(smiles: str) -> bool:
    """True iff the string parses and every atom satisfies its valence."""
    try:
        mol = parse_smiles(smiles)
    except SmilesError:
        return False
    return mol.all_valences_ok() and mol.is_connected()


# ---------------------------------------------------------------------------
# writing


def write_smiles(mol: Mol, order: list[int] | None = None) -> str:
    """Write a kekulized SMILES, visiting atoms in the given priority order.

    order[i] is the priority of atom i; lower goes first. Defaults to input
    order. Output uses plain organic-subset symbols except for atoms with a
    pinned hydrogen count.
    """
    n = mol.num_atoms()
    if n == 0:
        return ""
    prio = order if order is not None else list(range(n))

    # first pass: spanning tree + ring closure edges in writing order.
    # Recursive DFS so tree/ring classification is exact (a neighbor pushed
    # eagerly could be claimed by an earlier sibling's subtree first).
    pos: dict[int, int] = {}
    ring_edges: list[tuple[int, int]] = []
    tree_children: list[list[int]] = [[] for _ in range(n)]
    order_of_visit: list[int] = []

    def nbrs_sorted(i):
        return sorted(mol.neighbors[i], key=lambda j: prio[j])

    def classify(cur, parent):
        pos[cur] = len(pos)
        order_of_visit.append(cur)
        for j in nbrs_sorted(cur):
            if j != parent and j in pos and pos[j] < pos[cur]:
                ring_edges.append((min(cur, j), max(cur, j)))
        for j in nbrs_sorted(cur):
            if j == parent or j in pos:
                continue
            tree_children[cur].append(j)
            classify(j, cur)

    import sys

    root = min(range(n), key=lambda i: prio[i])
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 100))
    try:
        classify(root, None)
    finally:
        sys.setrecursionlimit(old_limit)
    if len(pos) != n:
        raise SmilesError("cannot write disconnected molecule")
    roots = [root]

    # ring digit allocation: a digit is busy from its opening atom to its
    # closing atom; reuse is fine once strictly closed (same-atom reuse is
    # ambiguous, hence the >= check)
    atom_digits: dict[int, list[tuple[int, int, int]]] = {i: [] for i in range(n)}
    active: dict[int, int] = {}  # digit -> latest close position
    for edge in sorted(ring_edges, key=lambda e: (min(pos[e[0]], pos[e[1]]), max(pos[e[0]], pos[e[1]]))):
        i, j = edge
        s, t = sorted((pos[i], pos[j]))
        digit = 1
        while active.get(digit, -1) >= s:
            digit += 1
        active[digit] = t
        order_ij = mol.neighbors[i][j]
        atom_digits[i].append((j, order_ij, digit))
        atom_digits[j].append((i, order_ij, digit))

    bond_sym = {1: "", 2: "=", 3: "#"}

    def atom_str(i):
        a = mol.atoms[i]
        if a.h_count is None:
            return a.element
        h = "" if a.h_count == 0 else ("H" if a.h_count == 1 else f"H{a.h_count}")
        return f"[{a.element}{h}]"

    def ring_str(i, came_from):
        parts = []
        for j, order_ij, digit in sorted(atom_digits[i], key=lambda t: t[2]):
            # bond symbol goes on the second endpoint only
            sym = bond_sym[order_ij] if pos[j] < pos[i] else ""
            parts.append(f"{sym}{digit}" if digit < 10 else f"{sym}%{digit:02d}")
        return "".join(parts)

    out = []

    def emit(i, parent):
        if parent is not None:
            out.append(bond_sym[mol.neighbors[parent][i]])
        out.append(atom_str(i))
        out.append(ring_str(i, parent))
        children = tree_children[i]
        for j in children[:-1]:
            out.append("(")
            emit(j, i)
            out.append(")")
        if children:
            emit(children[-1], i)

    import sys

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 100))
    try:
        emit(roots[0], None)
    finally:
        sys.setrecursionlimit(old_limit)
    return "".join(out)


# ---------------------------------------------------------------------------
# canonicalization


def _refine(mol: Mol, colors: list[int]) -> list[int]:
    n = mol.num_atoms()
    while True:
        sigs = []
        for i in range(n):
            nbr_sig = sorted((mol.neighbors[i][j], colors[j]) for j in mol.neighbors[i])
            sigs.append((colors[i], tuple(nbr_sig)))
        ranking = {sig: r for r, sig in enumerate(sorted(set(sigs)))}
        new_colors = [ranking[s] for s in sigs]
        if new_colors == colors:
            return colors
        colors = new_colors


def _initial_colors(mol: Mol) -> list[int]:
    sigs = []
    for i, atom in enumerate(mol.atoms):
        sigs.append(
            (atom.element, atom.h_count if atom.h_count is not None else -1,
             len(mol.neighbors[i]), mol.bond_order_sum(i))
        )
    ranking = {sig: r for r, sig in enumerate(sorted(set(sigs)))}
    return [ranking[s] for s in sigs]


def _first_tied_cell(colors: list[int]) -> list[int] | None:
    cells: dict[int, list[int]] = {}
    for i, c in enumerate(colors):
        cells.setdefault(c, []).append(i)
    for c in sorted(cells):
        if len(cells[c]) > 1:
            return cells[c]
    return None


def _canon_search(mol: Mol, colors: list[int]) -> str:
    """Individualization-refinement; returns the lexicographically smallest
    SMILES over all canonical tie-breaks. Exponential worst case, fine for
    molecule-sized graphs."""
    colors = _refine(mol, colors)
    cell = _first_tied_cell(colors)
    if cell is None:
        return write_smiles(mol, order=colors)
    best = None
    for a in cell:
        branched = [2 * c + 1 for c in colors]
        branched[a] = 2 * colors[a]
        s = _canon_search(mol, branched)
        if best is None or s < best:
            best = s
    return best


def canonical_smiles(smiles_or_mol) -> str:
    """Canonical kekulized SMILES: equal strings iff equal molecular graphs
    (within this kernel's kekulization)."""
    mol = smiles_or_mol if isinstance(smiles_or_mol, Mol) else parse_smiles(smiles_or_mol)
    return _canon_search(mol, _initial_colors(mol))


def canonical_order(mol: Mol) -> list[int]:
    """A deterministic atom priority refined from canonical invariants.

    Ties (symmetric atoms) are broken by index; sufficient for reproducible
    traversals, not for cross-representation identity (use canonical_smiles
    for that).
    """
    colors = _refine(mol, _initial_colors(mol))
    return [colors[i] * mol.num_atoms() + i for i in range(mol.num_atoms())]
