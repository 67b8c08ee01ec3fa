import itertools
from fractions import Fraction

import numpy as np
import pytest

from advinfo.errors import ContractViolation
from advinfo.grover import oracle_apply
from advinfo.histories import (
    AdvancedInfo,
    ChunkResult,
    History,
    PhaseAssignment,
    advanced_classical_search,
    all_advanced_infos,
    classical_delta_step,
    derive_phases,
    entanglement_max_search,
    enumerate_histories,
    expected_query_table,
    full_history_space,
    k_entropies,
    merge_chunks,
    plain_classical_search,
    reconstruct,
    search_chunk,
    sign_code,
    sign_matrices,
)
from advinfo.state import BasisIndex, entanglement_entropy, make_uniform_input

from conftest import DRAWERS, from_kx_terms, general_input, general_secondstage


def B(k, x, v):
    return BasisIndex(k, x, v)


class TestAdvancedInfo:
    def test_parse_and_candidates(self):
        assert AdvancedInfo.parse(2, "k0=0").candidates() == ["00", "01"]
        assert AdvancedInfo.parse(2, "k0=1").candidates() == ["10", "11"]
        assert AdvancedInfo.parse(2, "k1=0").candidates() == ["00", "10"]
        assert AdvancedInfo.parse(2, "k1=1").candidates() == ["01", "11"]

    def test_half_the_bits(self):
        with pytest.raises(ContractViolation):
            AdvancedInfo.parse(2, "k0=0,k1=1")
        with pytest.raises(ContractViolation):
            AdvancedInfo.parse(2, "")
        assert len(AdvancedInfo.parse(4, "k1=0,k3=1").candidates()) == 4

    @pytest.mark.parametrize("text", ["k2=0", "k0=2", "x0=1", "k0=0,k0=1"])
    def test_bad_text(self, text):
        with pytest.raises(ContractViolation):
            AdvancedInfo.parse(2, text)

    def test_all_infos(self):
        assert len(all_advanced_infos(2)) == 4
        assert all(len(i.candidates()) == 2 for i in all_advanced_infos(2))


class TestDeltaStep:
    def test_history_1(self):
        assert classical_delta_step(B("00", "00", 0)) == B("00", "00", 1)

    def test_history_4(self):
        assert classical_delta_step(B("01", "00", 1)) == B("01", "00", 1)

    def test_involution(self):
        for b in full_history_space(2):
            assert classical_delta_step(classical_delta_step(b.s_in)) == b.s_in

    def test_history_invariant_enforced(self):
        with pytest.raises(ContractViolation):
            History(B("00", "00", 0), B("00", "00", 0))


class TestEnumerateHistories:
    def test_k0_known_query_00(self):
        hs = enumerate_histories(AdvancedInfo.parse(2, "k0=0"), "00")
        assert [(h.s_in, h.s_out) for h in hs] == [
            (B("00", "00", 0), B("00", "00", 1)),
            (B("00", "00", 1), B("00", "00", 0)),
            (B("01", "00", 0), B("01", "00", 0)),
            (B("01", "00", 1), B("01", "00", 1)),
        ]

    def test_k0_is_1(self):
        hs = enumerate_histories(AdvancedInfo.parse(2, "k0=1"), "10")
        assert len(hs) == 4
        assert {h.s_in.k for h in hs} == {"10", "11"}
        assert all(h.s_in.x == "10" and h.s_out == classical_delta_step(h.s_in) for h in hs)

    def test_k1_is_0(self):
        hs = enumerate_histories(AdvancedInfo.parse(2, "k1=0"), "00")
        assert {h.s_in.k for h in hs} == {"00", "10"}

    def test_non_candidate_query(self):
        with pytest.raises(ContractViolation):
            enumerate_histories(AdvancedInfo.parse(2, "k0=0"), "10")

    def test_scenarios_are_inside_full_space(self):
        space = set(full_history_space(2))
        for info in all_advanced_infos(2):
            for q in info.candidates():
                assert set(enumerate_histories(info, q)) <= space


class TestFullSpace:
    def test_size_and_coverage(self):
        space = full_history_space(2)
        assert len(space) == 32
        assert len({h.s_in for h in space}) == 32

    def test_closure(self):
        for h in full_history_space(3):
            assert (h.s_in.k, h.s_in.x) == (h.s_out.k, h.s_out.x)


class TestPhases:
    def test_sign_pattern(self):
        ph = derive_phases(2)
        assert ph[B("00", "00", 0)] == 1
        assert ph[B("00", "00", 1)] == -1

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_reconstruction(self, n):
        before, after = reconstruct(derive_phases(n), full_history_space(n))
        assert before.max_difference(general_input(n)) <= 1e-12
        assert after.max_difference(general_secondstage(n)) <= 1e-12
        assert after.allclose(oracle_apply(make_uniform_input(n)))

    def test_displayed_states(self, uniform_in, marked):
        before, after = reconstruct(derive_phases(2), full_history_space(2))
        assert before.allclose(uniform_in)
        assert after.allclose(marked)

    def test_all_plus_is_wrong(self, uniform_in):
        space = full_history_space(2)
        before, _ = reconstruct(PhaseAssignment({h.s_in: 1 for h in space}), space)
        assert not before.allclose(uniform_in, 1e-3)
        # V sits in (|0> + |1>), not (|0> - |1>)
        assert before.amplitude("00", "00", 1).real > 0

    def test_single_history(self):
        h = History.starting_at(B("10", "10", 0))
        before, after = reconstruct(PhaseAssignment({h.s_in: 1}), [h])
        assert before.amplitude("10", "10", 0) == 1
        assert after.amplitude("10", "10", 1) == 1

    def test_duplicate_start(self):
        h = History.starting_at(B("10", "10", 0))
        with pytest.raises(ContractViolation):
            reconstruct(PhaseAssignment({h.s_in: 1}), [h, h])

    def test_missing_phase(self):
        space = full_history_space(1)
        with pytest.raises(ContractViolation):
            reconstruct(PhaseAssignment({}), space)

    def test_bad_phase_value(self):
        with pytest.raises(ContractViolation):
            PhaseAssignment({B("0", "0", 0): 2})

    def test_empty_space(self):
        with pytest.raises(ContractViolation):
            reconstruct(derive_phases(1), [])


def hadamard_count():
    """Number of 4x4 +-1 matrices with H H^T = 4 I, by integer enumeration."""
    count = 0
    for bits in itertools.product((1, -1), repeat=16):
        h = np.array(bits, dtype=np.int64).reshape(4, 4)
        if np.array_equal(h @ h.T, 4 * np.eye(4, dtype=np.int64)):
            count += 1
    return count


class TestEntanglementSearch:
    def test_sign_matrices_codes(self):
        m = sign_matrices(2, 0, 3)
        assert np.all(m[0] == 1)
        assert m[1][0, 0] == -1 and m[1].sum() == 14
        assert m[2][0, 1] == -1
        assert sign_code(m[2]) == 2

    def test_known_entropies(self):
        # rank-one pattern has no entanglement; a Hadamard pattern is maximal
        h = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=float)
        ent = k_entropies(np.stack([np.ones((4, 4)), h]))
        np.testing.assert_allclose(ent, [0.0, 2.0], atol=1e-12)

    def test_batch_agrees_with_state_entropy(self):
        rng = np.random.default_rng(7)
        codes = rng.integers(0, 1 << 16, size=40)
        for code in codes:
            signs = sign_matrices(2, int(code), int(code) + 1)[0]
            terms = {(k, x): signs[i, j] for i, k in enumerate(DRAWERS) for j, x in enumerate(DRAWERS)}
            state = from_kx_terms(2, terms, 1 / (4 * np.sqrt(2)))
            assert k_entropies(signs[None])[0] == pytest.approx(entanglement_entropy(state, "K"), abs=1e-9)

    def test_full_search(self):
        rep = entanglement_max_search(2)
        assert rep.cases == 65536
        assert rep.max_entropy == pytest.approx(2.0, abs=1e-9)
        assert rep.quantum_entropy == pytest.approx(2.0, abs=1e-9)
        assert rep.quantum_attains_max
        assert rep.all_plus_entropy == pytest.approx(0.0, abs=1e-12)
        # maximal entropy <=> all singular values equal <=> Hadamard sign matrix
        assert rep.maximizers == hadamard_count() == 768

    def test_quantum_signs(self):
        rep = entanglement_max_search(2)
        assert rep.quantum_signs == [[-1 if i == j else 1 for j in range(4)] for i in range(4)]

    def test_chunking_is_a_max_reduction(self):
        whole = search_chunk(2, 0, 1 << 16)
        parts = merge_chunks(search_chunk(2, a, a + 4096) for a in range(0, 1 << 16, 4096))
        assert parts.max_entropy == pytest.approx(whole.max_entropy)
        assert parts.maximizers == whole.maximizers
        assert parts.cases == whole.cases

    def test_merge_ignores_lower_chunks(self):
        merged = merge_chunks([ChunkResult(1.0, 5, 10), ChunkResult(2.0, 3, 10)])
        assert (merged.max_entropy, merged.maximizers, merged.cases) == (2.0, 3, 20)

    def test_process_pool(self):
        rep = entanglement_max_search(2, workers=2, chunks=4)
        assert rep.maximizers == 768

    def test_n1(self):
        # with two drawers the post-oracle signs [[-1, 1], [1, -1]] have rank
        # one, so the oracle leaves K and X unentangled
        assert np.linalg.matrix_rank(np.array([[-1, 1], [1, -1]])) == 1
        rep = entanglement_max_search(1)
        assert rep.cases == 16
        assert rep.max_entropy == pytest.approx(1.0, abs=1e-9)
        assert rep.quantum_entropy == pytest.approx(0.0, abs=1e-9)
        assert not rep.quantum_attains_max

    def test_too_large(self):
        with pytest.raises(ContractViolation):
            entanglement_max_search(3)


class TestClassicalSearch:
    def test_advanced_delta_one(self):
        r = advanced_classical_search(AdvancedInfo.parse(2, "k0=0"), "00", "00")
        assert (r.deltas, r.solution, r.query_count) == ((1,), "00", 1)

    def test_advanced_delta_zero(self):
        r = advanced_classical_search(AdvancedInfo.parse(2, "k0=0"), "01", "00")
        assert (r.deltas, r.solution, r.query_count) == ((0,), "01", 1)
        assert r.inferred

    def test_advanced_k1(self):
        r = advanced_classical_search(AdvancedInfo.parse(2, "k1=1"), "11", "01")
        assert (r.deltas, r.solution, r.query_count) == ((0,), "11", 1)

    def test_advanced_soundness(self):
        for info in all_advanced_infos(2):
            for q in info.candidates():
                for k in info.candidates():
                    r = advanced_classical_search(info, k, q)
                    assert r.solution == k and r.query_count == 1

    def test_advanced_contract(self):
        info = AdvancedInfo.parse(2, "k0=0")
        with pytest.raises(ContractViolation):
            advanced_classical_search(info, "10")
        with pytest.raises(ContractViolation):
            advanced_classical_search(info, "00", "11")

    def test_plain_first_hit(self):
        assert plain_classical_search(DRAWERS, "00").query_count == 1

    def test_plain_last_inferred(self):
        r = plain_classical_search(DRAWERS, "11")
        assert r.query_count == 3
        assert r.inferred and r.solution == "11"
        assert r.queries == ("00", "01", "10")

    def test_plain_soundness_every_order(self):
        for order in itertools.permutations(DRAWERS):
            counts = []
            for k in DRAWERS:
                r = plain_classical_search(order, k)
                assert r.solution == k
                counts.append(r.query_count)
            assert max(counts) == 3
            assert Fraction(sum(counts), 4) == Fraction(9, 4)

    def test_plain_needs_permutation(self):
        with pytest.raises(ContractViolation):
            plain_classical_search(["00", "01", "10"], "00")


def brute_plain_average(n):
    """Average position of k in ascending order, with the last drawer free."""
    size = 1 << n
    return Fraction(sum(min(k + 1, size - 1) for k in range(size)), size)


class TestQueryTable:
    def test_n2(self):
        t = expected_query_table(2)
        assert t.plain_average == Fraction(9, 4)
        assert t.plain_worst == 3
        assert t.advanced == 1
        assert t.quantum == 1
        assert t.plain_order_independent is True
        assert t.quantum_success == pytest.approx(1.0, abs=1e-12)

    def test_n1(self):
        t = expected_query_table(1)
        assert t.plain_average == brute_plain_average(1) == 1
        assert t.plain_worst == 1
        assert t.advanced == 1

    def test_exact_types(self):
        t = expected_query_table(2)
        assert isinstance(t.plain_average, Fraction)
        assert isinstance(t.advanced_average, Fraction)

    def test_n3_plain(self):
        t = expected_query_table(3)
        assert t.plain_average == brute_plain_average(3) == Fraction(35, 8)
        assert t.plain_worst == 7
