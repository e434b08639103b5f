"""Molecular kernel tests: SMILES subset, codec round trips, robustness."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molnest.chem.fingerprint import atom_environments, count_fingerprint
from molnest.chem.graph import (
    SmilesError,
    canonical_smiles,
    is_valid_smiles,
    parse_smiles,
    write_smiles,
)
from molnest.chem.selfies import (
    ALPHABET,
    SelfiesError,
    decode_selfies,
    encode_mol,
    selfies_to_smiles,
    smiles_to_selfies,
    split_selfies,
)
from molnest.oracle import ring_features

PYRROLINE_SMILES = "C1=CNCC1"
PYRROLINE_SELFIES = "[C][=C][N][C][C][Ring1][Branch1_1]"

_ATOM_TOKENS = tuple(t for t in ALPHABET if "Ring" not in t and "Branch" not in t)


class TestSmilesParsing:
    def test_unclosed_ring_is_invalid(self):
        assert not is_valid_smiles("C1=CN")

    def test_unclosed_branch_is_invalid(self):
        assert not is_valid_smiles("C(CN")

    def test_pentavalent_carbon_is_invalid(self):
        assert not is_valid_smiles("C(C)(C)(C)(C)C")

    def test_empty_is_invalid(self):
        assert not is_valid_smiles("")

    def test_fragment_separator_unsupported(self):
        assert not is_valid_smiles("C.C")

    def test_charged_bracket_unsupported(self):
        assert not is_valid_smiles("[NH4+]")

    def test_valid_examples(self):
        for s in (PYRROLINE_SMILES, "C", "CC(=O)OC", "N#CCS", "FC(F)(F)Br"):
            assert is_valid_smiles(s), s

    def test_hypervalent_sulfur_allowed(self):
        assert is_valid_smiles("CS(=O)(=O)C")

    def test_ring_bond_order_on_either_side(self):
        a = canonical_smiles("C=1CCCCC=1")
        b = canonical_smiles("C1CCCCC=1")
        assert a == b

    def test_conflicting_ring_orders_rejected(self):
        with pytest.raises(SmilesError):
            parse_smiles("C=1CCCCC#1")


class TestKekulization:
    def test_benzene(self):
        assert canonical_smiles("c1ccccc1") == canonical_smiles("C1=CC=CC=C1")

    def test_pyridine(self):
        assert canonical_smiles("c1ccncc1") == canonical_smiles("C1=CC=NC=C1")

    def test_furan(self):
        assert canonical_smiles("c1ccoc1") == canonical_smiles("C1=CC=CO1")

    def test_pyrrole_needs_explicit_h(self):
        assert canonical_smiles("c1cc[nH]c1") == canonical_smiles("C1=CC=C[NH]1")

    def test_unkekulizable_rejected(self):
        # odd-membered all-carbon aromatic ring has no perfect matching
        with pytest.raises(SmilesError):
            parse_smiles("c1cccc1")


class TestCanonical:
    def test_equivalent_writings_collapse(self):
        variants = ["OCC", "CCO", "C(O)C", "C(CO)"]
        forms = {canonical_smiles(v) for v in variants}
        assert len(forms) == 1

    def test_branch_permutations_collapse(self):
        variants = ["CC(N)(O)S", "CC(O)(S)N", "CC(S)(N)O"]
        assert len({canonical_smiles(v) for v in variants}) == 1

    def test_symmetric_ring(self):
        assert canonical_smiles("C1CCCCC1") == canonical_smiles("C2CCCCC2")

    def test_distinct_molecules_stay_distinct(self):
        assert canonical_smiles("CCO") != canonical_smiles("COC")

    def test_write_parse_preserves_graph(self):
        mol = parse_smiles("CC(=O)N1CC(Br)C1")
        out = write_smiles(mol)
        back = parse_smiles(out)
        assert back.num_atoms() == mol.num_atoms()
        assert sorted(o for *_, o in back.bonds()) == sorted(o for *_, o in mol.bonds())


class TestSelfiesCodec:
    def test_reference_molecule_encodes_exactly(self):
        assert smiles_to_selfies(PYRROLINE_SMILES) == PYRROLINE_SELFIES

    def test_reference_molecule_decodes_back(self):
        out = selfies_to_smiles(PYRROLINE_SELFIES)
        assert canonical_smiles(out) == canonical_smiles(PYRROLINE_SMILES)

    def test_single_atom(self):
        assert smiles_to_selfies("C") == "[C]"
        assert selfies_to_smiles("[C]") == "C"

    def test_malformed_brackets_raise(self):
        with pytest.raises(SelfiesError):
            split_selfies("[C][=C")
        with pytest.raises(SelfiesError):
            split_selfies("[C]x[C]")

    def test_unknown_token_raises_on_decode(self):
        with pytest.raises(SelfiesError):
            decode_selfies("[C][Xx]")

    def test_operator_only_sequence_decodes_empty(self):
        assert selfies_to_smiles("[Ring1][Branch1_1]") == ""

    def test_operand_at_end_of_string(self):
        # ring token missing its operand: derivation just stops
        assert selfies_to_smiles("[C][C][Ring1]") == "CC"

    def test_dead_chain_stops_derivation(self):
        # F has valence 1; everything after it is unreachable
        assert selfies_to_smiles("[C][F][C][C]") == "CF"

    def test_invalid_smiles_rejected_by_encoder(self):
        with pytest.raises(SmilesError):
            smiles_to_selfies("C1=CN")

    @given(st.lists(st.sampled_from(ALPHABET), min_size=1, max_size=20))
    @settings(max_examples=300, deadline=None)
    def test_robustness_nonempty_derivations_are_valid(self, tokens):
        # zero-atom derivations happen when atom tokens only occur as
        # ring/branch operands; any derivation with atoms must be valid
        mol = decode_selfies(tokens)
        if mol.num_atoms() == 0:
            return
        smiles = write_smiles(mol)
        assert is_valid_smiles(smiles), (tokens, smiles)

    def test_atom_token_consumed_as_operand(self):
        assert selfies_to_smiles("[Ring1][C]") == ""

    @given(st.lists(st.sampled_from(ALPHABET), min_size=1, max_size=20))
    @settings(max_examples=300, deadline=None)
    def test_round_trip_through_encoder(self, tokens):
        mol = decode_selfies(tokens)
        if mol.num_atoms() == 0:
            return
        reencoded = encode_mol(mol)
        back = decode_selfies(reencoded)
        assert canonical_smiles(back) == canonical_smiles(mol)

    def test_smiles_selfies_smiles_round_trip_battery(self):
        battery = [
            "CC(=O)OC1=CC=CC=C1", "N#CC(Br)CS", "C1CC1C2CCC2", "O=S(=O)(C)C",
            "CC(C)(C)C#N", "ClC1=CC(=O)NC1", "C1CCCCCCCCC1", "CC1(C)CC1",
        ]
        for smiles in battery:
            rt = selfies_to_smiles(smiles_to_selfies(smiles))
            assert canonical_smiles(rt) == canonical_smiles(smiles), smiles


class TestFingerprint:
    def test_invariant_to_atom_numbering(self):
        a = parse_smiles("OCC(N)CS")
        b = parse_smiles("SCC(N)CO")
        assert sorted(atom_environments(a)) == sorted(atom_environments(b))

    def test_distinct_molecules_differ(self):
        a = count_fingerprint(parse_smiles("CCO"))
        b = count_fingerprint(parse_smiles("COC"))
        assert (a != b).any()

    def test_counts_sum_matches_env_count(self):
        mol = parse_smiles("CC(=O)NC")
        fp = count_fingerprint(mol, width=512)
        assert fp.sum() == len(atom_environments(mol))


class TestRingFeatures:
    def test_acyclic(self):
        feats = ring_features(parse_smiles("CCCCC"))
        assert feats == {"n_rings": 0, "n_macrocycles": 0, "n_spiro": 0, "n_bridgeheads": 0}

    def test_macrocycle(self):
        feats = ring_features(parse_smiles("C1CCCCCCCCC1"))
        assert feats["n_rings"] == 1
        assert feats["n_macrocycles"] == 1

    def test_spiro(self):
        feats = ring_features(parse_smiles("C1CCC2(CC1)CCCC2"))
        assert feats["n_spiro"] == 1

    def test_fused_is_not_spiro(self):
        feats = ring_features(parse_smiles("C1CC2CCC1CC2"))
        assert feats["n_spiro"] == 0
        assert feats["n_bridgeheads"] == 2
