import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cssqec import channels, codec
from cssqec.codes import LinearCode, simplex7, seven_qubit_triple, three_qubit_triple
from cssqec.exceptions import UsageError
from cssqec.gf2 import BinaryMatrix, BitWord, row_reduce
from cssqec.qstate import QuantumState, code_state, complement_qubits, complement_qubits_basis2
from conftest import H1, hadamard_n, kron_all, random_pair

SEVEN = seven_qubit_triple()
N3 = three_qubit_triple()
SIMPLEX_WORDS = {"0000000", "0001111", "0110011", "0111100", "1010101", "1011010", "1100110", "1101001"}


def nonzero_words(amps, n):
    return {format(i, f"0{n}b") for i in np.flatnonzero(np.abs(amps) > 1e-9)}


def complex_pairs():
    return st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
        lambda t: np.hypot(np.hypot(t[0], t[1]), np.hypot(t[2], t[3])) > 1e-3
    ).map(lambda t: _norm(complex(t[0], t[1]), complex(t[2], t[3])))


def _norm(a, b):
    r = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return a / r, b / r


# dense-matrix model of the three-qubit phase scheme, independent of the package

def _cnot3(c, t):
    u = np.zeros((8, 8))
    for i in range(8):
        b = [(i >> (2 - k)) & 1 for k in range(3)]
        if b[c]:
            b[t] ^= 1
        u[b[0] * 4 + b[1] * 2 + b[2], i] = 1
    return u


def dense_three_qubit_alpha(phis, eps, a, b):
    hhh = hadamard_n(3)
    cnot2 = lambda c, t: hhh @ _cnot3(c, t) @ hhh
    zbar = H1 @ [1, 0]
    psi = cnot2(0, 2) @ cnot2(0, 1) @ np.kron(np.kron([a, b], zbar), zbar)
    err = kron_all([np.diag([np.exp(0.5j * eps * p), np.exp(-0.5j * eps * p)]) for p in phis])
    psi = cnot2(0, 1) @ cnot2(0, 2) @ err @ psi
    rho = np.zeros((2, 2), complex)
    for s1, s2 in itertools.product((0, 1), repeat=2):
        proj = kron_all([np.eye(2), np.diag([1 - s1, s1]), np.diag([1 - s2, s2])])
        v = hhh @ proj @ hhh @ psi
        if s1 and s2:
            v = kron_all([np.diag([1, -1]), np.eye(2), np.eye(2)]) @ v
        t = v.reshape(2, 4)
        rho += t @ t.conj().T
    return rho[0, 1] / (a * np.conj(b))


class TestEncoder:
    def test_seven_qubit_zero_is_simplex_state(self):
        block = codec.encode(SEVEN, [1, 0])
        assert nonzero_words(block.state.amplitudes, 7) == SIMPLEX_WORDS
        assert np.allclose(np.abs(block.state.amplitudes[np.abs(block.state.amplitudes) > 1e-9]), 8 ** -0.5)

    def test_seven_qubit_one_is_complement_coset(self):
        block = codec.encode(SEVEN, [0, 1])
        flipped = {"".join("1" if c == "0" else "0" for c in w) for w in SIMPLEX_WORDS}
        assert nonzero_words(block.state.amplitudes, 7) == flipped

    def test_seven_qubit_offset_and_position(self):
        plan = codec.encoder_plan(SEVEN)
        assert plan.offsets.to_strings() == ["0010110"]
        assert plan.logical_positions == (2,)

    @given(complex_pairs())
    def test_three_qubit_form(self, ab):
        a, b = ab
        got = codec.encode(N3, [a, b]).state.amplitudes
        want = hadamard_n(3) @ (np.array([a + b, 0, 0, 0, 0, 0, 0, a - b]) / np.sqrt(2))
        assert abs(1 - abs(np.vdot(want, got)) ** 2) < 1e-12

    @given(complex_pairs())
    def test_output_in_coset_span(self, ab):
        assert codec.encode(SEVEN, ab).residual() < 1e-10

    def test_ideal_matches_circuit(self):
        block = codec.encode(SEVEN, [0.6, 0.8j])
        assert abs(np.vdot(block.ideal(), block.state.amplitudes)) == pytest.approx(1, abs=1e-12)

    def test_bad_logical_length(self):
        with pytest.raises(UsageError):
            codec.encode(SEVEN, [1, 0, 0, 0])


class TestCorrectorStructure:
    def test_three_qubit_basis2(self):
        circ = codec.build_corrector(N3, 2, reencode=False)
        cnots = [g.qubits for g in circ if g.kind == "CNOT"]
        assert cnots == [(0, 1), (0, 2)]
        (lookup,) = [g for g in circ if g.kind == "CNOT_IF"]
        assert lookup.table[0b11] == (0,)
        assert lookup.table[0b00] == ()

    def test_ancilla_count(self):
        c1 = codec.build_corrector(SEVEN, 1, "ancilla", anc_start=7)
        measured = {g.qubits[0] for g in c1 if g.kind == "MEASURE"}
        assert measured == {7, 8, 9}
        assert codec.ancilla_count(SEVEN, "ancilla") == 3

    def test_unknown_style(self):
        with pytest.raises(UsageError):
            codec.build_corrector(SEVEN, 1, "magic")

    def test_slot_read_before_write(self):
        circ = codec.Circuit().reset(0, 0)
        with pytest.raises(UsageError):
            circ.validate(1)

    def test_qubit_out_of_range(self):
        with pytest.raises(UsageError):
            codec.Circuit().not_(3).validate(2)


class TestCorrection:
    def _run(self, state, style="in-place"):
        circ = codec.full_corrector(SEVEN, style)
        branches = codec.simulate(circ, state)
        return circ, branches

    def test_error_free_is_identity(self):
        block = codec.encode(SEVEN, [0.6, 0.8j])
        circ, branches = self._run(block.state)
        assert len(branches) == 1
        fid = abs(np.vdot(block.state.amplitudes, branches[0].state.amplitudes)) ** 2
        assert abs(fid - 1) < 1e-12
        assert all(o.syndrome.value == 0 for o in codec.outcomes(circ, branches[0]))

    @pytest.mark.parametrize("basis", [1, 2])
    @pytest.mark.parametrize("q", range(7))
    def test_single_flips_inverted(self, basis, q):
        block = codec.encode(SEVEN, [0.6, 0.8j])
        flip = complement_qubits if basis == 1 else complement_qubits_basis2
        circ, branches = self._run(flip(block.state, BitWord.unit(7, q)))
        rho = codec.branch_density(branches)
        target = block.ideal()
        assert abs(1 - np.vdot(target, rho @ target).real) < 1e-12
        (branch,) = branches
        outcome = [o for o in codec.outcomes(circ, branch) if o.basis == basis][0]
        assert outcome.correction == BitWord.unit(7, q)

    def test_basis1_syndromes_distinct(self):
        block = codec.encode(SEVEN, [1, 0])
        circ = codec.build_corrector(SEVEN, 1)
        seen = set()
        for q in range(7):
            (branch,) = codec.simulate(circ, complement_qubits(block.state, BitWord.unit(7, q)))
            seen.add(codec.outcomes(circ, branch)[0].syndrome.value)
        assert len(seen) == 7 and 0 not in seen

    @settings(max_examples=25)
    @given(st.integers(0, 2 ** 31), st.integers(0, 6), st.sampled_from(["in-place", "ancilla"]))
    def test_branch_weights_sum_to_one(self, seed, q, style):
        css = SEVEN
        n_anc = codec.ancilla_count(css, style)
        block = codec.encode(css, [0.6, 0.8], n_env=2, n_anc=n_anc)
        damaged = channels.apply_defection(block.state, channels.DefectionSpec.random([q], seed))
        branches = codec.simulate(codec.full_corrector(css, style, n_env=2), damaged)
        assert abs(sum(b.probability for b in branches) - 1) < 1e-12

    def test_cosets_corrected_in_parallel(self):
        # branch by branch, correcting a|C> + b|notC> equals a*(run on |C>) + b*(run on |notC>)
        a, b = 0.6, 0.8j
        spec = channels.DefectionSpec.random([4], seed=12)
        circ = codec.full_corrector(SEVEN, n_env=2)

        def run(logical):
            block = codec.encode(SEVEN, logical, n_env=2)
            return {tuple(sorted(br.record.items())): br for br in codec.simulate(circ, channels.apply_defection(block.state, spec))}

        zero, one, mixed = run([1, 0]), run([0, 1]), run([a, b])
        assert zero.keys() == one.keys() == mixed.keys()
        for key, br in mixed.items():
            assert br.probability == pytest.approx(zero[key].probability, abs=1e-12)
            combo = a * zero[key].state.amplitudes + b * one[key].state.amplitudes
            assert np.max(np.abs(combo - br.state.amplitudes)) < 1e-12

    def test_sampled_mode(self):
        rng = channels.make_rng(3, 2)
        block = codec.encode(SEVEN, [0.6, 0.8], n_env=2)
        damaged = channels.apply_defection(block.state, channels.DefectionSpec.random([1], 7))
        (branch,) = codec.simulate(codec.full_corrector(SEVEN, n_env=2), damaged, "sample", rng)
        assert branch.probability == 1.0
        rho = branch.state.system_density()
        assert np.vdot(block.ideal(), rho @ block.ideal()).real == pytest.approx(1, abs=1e-9)

    def test_sample_mode_needs_generator(self):
        with pytest.raises(UsageError):
            codec.simulate(codec.Circuit(), QuantumState.zero(1), "sample")

    def test_mid_circuit_error_hook(self):
        block = codec.encode(SEVEN, [0.6, 0.8])
        circ = codec.Circuit().error(channels.PhaseErrorSpec([3], [np.pi], 1.0))
        circ.extend(codec.full_corrector(SEVEN))
        branches = codec.simulate(circ, block.state)
        rho = codec.branch_density(branches)
        assert np.vdot(block.ideal(), rho @ block.ideal()).real == pytest.approx(1, abs=1e-12)


class TestPhaseExperiment:
    @settings(max_examples=30)
    @given(st.lists(st.floats(0, 2 * np.pi), min_size=3, max_size=3), st.floats(0, 1), complex_pairs())
    def test_matches_dense_model(self, phis, eps, ab):
        a, b = ab
        if abs(a * b) < 1e-3:
            return
        got = codec.run_phase_error_experiment(*phis, eps, a, b).alpha
        assert abs(got - dense_three_qubit_alpha(phis, eps, a, b)) < 1e-10
        assert abs(got - codec.phase_alpha_closed_form(phis, eps)) < 1e-10

    @pytest.mark.parametrize("j", range(3))
    def test_single_error_restored(self, j):
        phis = [0.0, 0.0, 0.0]
        phis[j] = 2.1
        assert abs(codec.run_phase_error_experiment(*phis, 0.8, 0.6, 0.8j).alpha - 1) < 1e-12

    def test_cubic_scaling(self):
        errs = [abs(1 - codec.run_phase_error_experiment(1.0, 1.3, 0.7, e, 0.6, 0.8).alpha) for e in (0.02, 0.01)]
        assert errs[0] / errs[1] == pytest.approx(8, rel=0.02)

    def test_zero_eps(self):
        assert abs(codec.run_phase_error_experiment(1.0, 2.0, 3.0, 0.0, 0.6, 0.8).alpha - 1) < 1e-14


class TestPurityAmplification:
    @settings(max_examples=30)
    @given(st.lists(st.floats(0, 1), min_size=3, max_size=3))
    def test_formula(self, eps):
        e0, e1, e2 = eps
        want = 1 - 0.5 * (e0 * e1 + e0 * e2 + e1 * e2) + 0.5 * e0 * e1 * e2
        got = codec.run_purity_amplification(*eps, 0.6, 0.8j).alpha
        assert abs(got - want) < 1e-10

    @given(st.floats(0.01, 1), st.integers(0, 2))
    def test_single_decoherence_corrected(self, e, j):
        eps = [0.0, 0.0, 0.0]
        eps[j] = e
        assert abs(codec.run_purity_amplification(*eps, 0.6, 0.8).alpha - 1) < 1e-12

    @given(st.floats(0.01, 0.99))
    def test_equal_strengths_beat_uncorrected(self, e):
        got = codec.run_purity_amplification(e, e, e, 0.6, 0.8).alpha.real
        assert abs(got - (1 - 1.5 * e ** 2 + 0.5 * e ** 3)) < 1e-10
        assert got > 1 - e

    def test_all_zero(self):
        assert abs(codec.run_purity_amplification(0, 0, 0, 0.6, 0.8).alpha - 1) < 1e-14


class TestCosetIdentity:
    FOUR = LinearCode(BinaryMatrix.from_strings(["0011", "1100"]))

    @pytest.mark.parametrize("positions", [[0], [3]])
    @pytest.mark.parametrize("j", [0, 1])
    def test_four_bit_example(self, positions, j):
        assert codec.coset_sum_identity_check(self.FOUR, positions, j) < 1e-10

    def test_listed_sign_pattern(self):
        s = code_state(self.FOUR.generator)
        flipped = complement_qubits_basis2(s, BitWord.from_str("0001")).amplitudes * 2
        want = {"0000": 1, "0011": -1, "1100": 1, "1111": -1}
        for w, sign in want.items():
            assert flipped[int(w, 2)] == pytest.approx(sign)

    def test_no_positions(self):
        assert codec.coset_sum_identity_check(simplex7(), [], 0) < 1e-12

    def test_simplex_pivots(self):
        _, _, pivots = row_reduce(simplex7().generator)
        for p in pivots:
            for j in (0, 1):
                assert codec.coset_sum_identity_check(simplex7(), [p], j) < 1e-10

    def test_two_positions(self):
        for j in range(4):
            assert codec.coset_sum_identity_check(simplex7(), [0, 1], j) < 1e-10


class TestRecovery:
    @settings(max_examples=25)
    @given(st.integers(0, 2 ** 31), st.integers(0, 6), complex_pairs(), st.sampled_from(["in-place", "ancilla"]))
    def test_single_defection_recovered(self, seed, q, ab, style):
        r = codec.run_recovery(SEVEN, ab, channels.DefectionSpec.random([q], seed), style)
        assert r.guaranteed
        assert r.fidelity >= 1 - 1e-9 and r.purity >= 1 - 1e-9

    def test_empty_defection(self):
        r = codec.run_recovery(SEVEN, [0.6, 0.8], channels.DefectionSpec(()))
        assert r.fidelity == pytest.approx(1, abs=1e-12)

    def test_two_defections_not_guaranteed(self):
        fids = []
        for seed in range(3):
            r = codec.run_recovery(SEVEN, [0.6, 0.8], channels.DefectionSpec.random([0, 3], seed))
            assert not r.guaranteed
            assert abs(r.branch_weight - 1) < 1e-12
            fids.append(r.fidelity)
        assert min(fids) < 0.999

    def test_sampled_recovery(self):
        r = codec.run_recovery(SEVEN, [0.6, 0.8], channels.DefectionSpec.random([5], 2), mode="sample", seed=4)
        assert r.fidelity == pytest.approx(1, abs=1e-9)

    def test_entangler_and_flips_recovered(self):
        for q in range(7):
            for spec in (
                channels.DefectionSpec.from_entangle(q, 0.7),
                channels.DefectionSpec.from_unitary(q, np.array([[0, 1], [1, 0]])),
                channels.DefectionSpec.from_unitary(q, np.diag([1, -1])),
            ):
                r = codec.run_recovery(SEVEN, [0.6, 0.8j], spec)
                assert r.fidelity >= 1 - 1e-9 and r.purity >= 1 - 1e-9

    def test_three_qubit_scheme_only_fixes_basis2(self):
        # d1 = 1, so a basis-1 flip is beyond its reach; a basis-2 flip is not
        flip_z = channels.DefectionSpec.from_unitary(1, np.diag([1, -1]))
        flip_x = channels.DefectionSpec.from_unitary(1, np.array([[0, 1], [1, 0]]))
        assert codec.run_recovery(N3, [0.6, 0.8], flip_z).fidelity == pytest.approx(1, abs=1e-12)
        r = codec.run_recovery(N3, [0.6, 0.8], flip_x)
        assert not r.guaranteed
