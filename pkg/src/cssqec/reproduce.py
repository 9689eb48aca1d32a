"""Numerical checks of every quantitative claim the library is built around.

Each check returns a :class:`CheckResult`; ``run_all`` runs them in order.
Closed forms are written out here as printed, not taken from the library,
so a disagreement shows up as a failure rather than being hidden.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bounds, channels, codec, codes
from .gf2 import BitWord
from .qstate import (
    HADAMARD,
    PAULI_X,
    PAULI_Z,
    PhasedGenerator,
    QuantumState,
    apply_1q,
    code_state,
    complement_qubits,
    complement_qubits_basis2,
    parity_check_probability,
    state_from_generator,
    support_in_basis2,
    basis2_amplitudes,
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _random_pair(rng: np.random.Generator) -> tuple[complex, complex]:
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


def check_duality() -> tuple[bool, str]:
    worst = 0.0
    ok = True
    for name in ("repetition3", "even_parity3", "hamming7", "simplex7"):
        c = codes.get_code(name)
        s = code_state(c.generator)
        got = {w.value for w in support_in_basis2(s)}
        want = set(codes.dual(c).word_set())
        mags = np.abs(basis2_amplitudes(s))[sorted(want)]
        worst = max(worst, float(np.ptp(mags)))
        ok &= got == want
    ok &= worst < 1e-12
    return ok, f"supports equal dual word sets, magnitude spread {worst:.1e}"


def check_interference() -> tuple[bool, str]:
    grid = np.arange(8) * 2 * np.pi / 8
    worst = 0.0
    for phases in itertools.product(grid, repeat=3):
        s = state_from_generator(PhasedGenerator(codes.G_SIMPLEX, phases))
        for j, row in enumerate(codes.G_SIMPLEX):
            got = parity_check_probability(s, row)
            worst = max(worst, abs(got - math.cos(phases[j] / 2) ** 2))
    return worst < 1e-10, f"max deviation {worst:.1e} over 512 phase triples"


def check_encoded_form(seed: int = 3) -> tuple[bool, str]:
    rng = channels.make_rng(seed)
    css = codes.three_qubit_triple()
    worst = 0.0
    for _ in range(20):
        a, b = _random_pair(rng)
        got = codec.encode(css, [a, b]).state.amplitudes
        bar = np.zeros(8, dtype=complex)
        bar[0], bar[7] = a + b, a - b
        want = QuantumState(bar / np.linalg.norm(bar), 3)
        for q in range(3):
            want = want.replace(apply_1q(want.amplitudes, 3, q, HADAMARD))
        worst = max(worst, abs(1 - abs(np.vdot(want.amplitudes, got)) ** 2))
    return worst < 1e-12, f"max fidelity deviation {worst:.1e}"


def printed_phase_alpha(phis, eps) -> complex:
    c = [math.cos(eps * p) for p in phis]
    s = [math.sin(eps * p) for p in phis]
    return 0.5 * (sum(c) - c[0] * c[1] * c[2] - 1j * s[0] * s[1] * s[2])


def check_phase_correction(seed: int = 4) -> tuple[bool, str]:
    rng = channels.make_rng(seed)
    a, b = _random_pair(rng)
    worst = worst_conj = 0.0
    for _ in range(100):
        phis = rng.uniform(0, 2 * np.pi, 3)
        eps = rng.uniform(0, 1)
        alpha = codec.run_phase_error_experiment(*phis, eps, a, b).alpha
        want = printed_phase_alpha(phis, eps)
        worst = max(worst, abs(alpha - want))
        worst_conj = max(worst_conj, abs(alpha - want.conjugate()))
    single = 0.0
    for j in range(3):
        phis = [0.0, 0.0, 0.0]
        phis[j] = rng.uniform(0.1, 2 * np.pi)
        single = max(single, abs(codec.run_phase_error_experiment(*phis, 0.9, a, b).alpha - 1))
    epss = np.logspace(-3, -1, 7)
    phis = (1.0, 1.3, 0.7)
    err = [abs(1 - codec.run_phase_error_experiment(*phis, e, a, b).alpha) for e in epss]
    slope = float(np.polyfit(np.log(epss), np.log(err), 1)[0])
    ok = worst < 1e-10 and single < 1e-12 and abs(slope - 3) <= 0.1
    return ok, (
        f"vs printed form {worst:.1e} (vs conjugate {worst_conj:.1e}); "
        f"single-error |1-alpha| {single:.1e}; slope {slope:.3f}"
    )


def printed_entangle_alpha(e0, e1, e2) -> float:
    return 1 - 0.5 * (e0 * e1 + e0 * e2 + e1 * e2) + 0.5 * e0 * e1 * e2


def check_purity_amplification(seed: int = 5) -> tuple[bool, str]:
    rng = channels.make_rng(seed)
    a, b = _random_pair(rng)
    grid = np.linspace(0, 1, 5)
    worst = 0.0
    for es in itertools.product(grid, repeat=3):
        alpha = codec.run_purity_amplification(*es, a, b).alpha
        worst = max(worst, abs(alpha - printed_entangle_alpha(*es)))
    single = max(
        abs(codec.run_purity_amplification(*(e if i == j else 0 for i in range(3)), a, b).alpha - 1)
        for j in range(3) for e in grid[1:]
    )
    better = all(
        codec.run_purity_amplification(e, e, e, a, b).alpha.real > 1 - e for e in grid[1:-1]
    )
    ok = worst < 1e-10 and single < 1e-10 and better
    return ok, f"max deviation {worst:.1e}; single-error {single:.1e}; beats 1-eps: {better}"


def check_coset_identity() -> tuple[bool, str]:
    four = codes.LinearCode(codes.BinaryMatrix.from_strings(["0011", "1100"]))
    worst = max(codec.coset_sum_identity_check(four, [0], j) for j in range(2))
    simplex = codes.simplex7()
    for q in range(7):
        for j in range(2):
            worst = max(worst, codec.coset_sum_identity_check(simplex, [q], j))
    return worst < 1e-10, f"max deviation {worst:.1e}"


def check_single_qubit_recovery(seed: int = 7, trials: int = 200) -> tuple[bool, str]:
    css = codes.seven_qubit_triple()
    rng = channels.make_rng(seed)
    low_f = low_p = 1.0
    for t in range(trials):
        q = int(rng.integers(7))
        a, b = _random_pair(rng)
        kind = t % 4
        if kind == 0:
            spec = channels.DefectionSpec.from_entangle(q, float(rng.uniform(0.01, 1)))
        elif kind == 1:
            spec = channels.DefectionSpec.from_unitary(q, PAULI_X if rng.random() < 0.5 else PAULI_Z)
        else:
            spec = channels.DefectionSpec.random([q], seed=seed * 100_000 + t)
        r = codec.run_recovery(css, [a, b], spec)
        low_f = min(low_f, r.fidelity)
        low_p = min(low_p, r.purity)
    ok = low_f >= 1 - 1e-9 and low_p >= 1 - 1e-9
    return ok, f"min fidelity {low_f:.12f}, min purity {low_p:.12f} over {trials} trials"


def check_flips() -> tuple[bool, str]:
    css = codes.seven_qubit_triple()
    block = codec.encode(css, [0.6, 0.8j])
    target = block.ideal()
    circ = codec.full_corrector(css)
    worst = 0.0
    for q in range(7):
        mask = BitWord.unit(7, q)
        for damaged in (complement_qubits(block.state, mask), complement_qubits_basis2(block.state, mask)):
            branches = codec.simulate(circ, damaged)
            rho = codec.branch_density(branches)
            worst = max(worst, abs(1 - np.vdot(target, rho @ target).real))
    return worst < 1e-12, f"14 flips, max fidelity deviation {worst:.1e}"


def check_bounds() -> tuple[bool, str]:
    h = bounds.inverse_entropy(0.5)
    lo, hi = bounds.threshold_summary()
    (_, _, at_low, _), (_, at_up, _, _) = bounds.emit_rate_curves([0.110028, 0.220056])
    ok = (
        abs(h - 0.110028) <= 1e-5
        and abs(lo - 0.055014) <= 1e-5
        and abs(hi - 0.110028) <= 1e-5
        and abs(at_up) <= 1e-4
        and abs(at_low) <= 1e-4
    )
    return ok, f"H^-1(1/2)={h:.6f}; thresholds ({lo:.6f}, {hi:.6f}); curves at crossings {at_low:.1e}, {at_up:.1e}"


def check_worked_example() -> tuple[bool, str]:
    r4 = bounds.survival(10000, 0.04, 939, 10000)
    r3 = bounds.survival(10000, 0.03, 939, 10000)
    ok = 0.003 <= r4.P_exact <= 0.03 and 4e-24 <= r3.tail_exact <= 4e-22
    return ok, (
        f"P_exact={r4.P_exact:.4g} (erf form {r4.P_erf:.4g}); "
        f"1-F_exact at p=0.03 {r3.tail_exact:.3g} (erf form {r3.tail_erf:.3g})"
    )


def check_oracles(seed: int = 11, trials: int = 100_000) -> tuple[bool, str]:
    worst = 0.0
    for n in (5, 12, 30):
        for p in ("1/20", "3/10", "1/2"):
            for x in range(0, n + 1, 3):
                exact = bounds.binomial_cdf_exact(n, Fraction(p), x)
                got = bounds.binomial_cdf_parts(n, float(Fraction(p)), x)[0]
                worst = max(worst, abs(got - float(exact)) / float(exact))
    f = bounds.binomial_cdf_parts(100, 0.05, 10)[0]
    hits = 0
    for t in range(trials):
        if channels.sample_stochastic_defection(100, 0.05, seed=seed * 10_000_000 + t).x <= 10:
            hits += 1
    emp = hits / trials
    se = math.sqrt(f * (1 - f) / trials)
    ok = worst < 1e-12 and abs(emp - f) <= 3 * se
    return ok, f"rational rel. error {worst:.1e}; MC {emp:.5f} vs {f:.5f} ({abs(emp - f) / se:.2f} s.e.)"


CHECKS = [
    (1, "dual-basis support", check_duality),
    (2, "interference law", check_interference),
    (3, "three-qubit encoded form", check_encoded_form),
    (4, "phase-error correction", check_phase_correction),
    (5, "purity amplification", check_purity_amplification),
    (6, "coset-sum identity", check_coset_identity),
    (7, "arbitrary single-qubit recovery", check_single_qubit_recovery),
    (8, "exhaustive single flips", check_flips),
    (9, "entropy bounds and thresholds", check_bounds),
    (10, "worked survival example", check_worked_example),
    (11, "oracle agreement", check_oracles),
]


def run_check(number: int) -> CheckResult:
    for num, name, fn in CHECKS:
        if num == number:
            t0 = time.perf_counter()
            ok, detail = fn()
            return CheckResult(num, name, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(number)


def run_all() -> list[CheckResult]:
    return [run_check(num) for num, _, _ in CHECKS]
