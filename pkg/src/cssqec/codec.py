"""Encoding and correction circuits for CSS triples, and the experiments built on them.

Circuits are flat gate lists over global qubit indices. Measurements are
simulated either by enumerating every outcome branch with its probability
(the default) or by sampling one outcome per measurement from a seeded
generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import channels
from .codes import CssTriple, LinearCode, SyndromeTable, build_syndrome_table, coset_decompose, three_qubit_triple
from .exceptions import UsageError
from .gf2 import BinaryMatrix, BitWord, row_basis, row_reduce
from .qstate import (
    HADAMARD,
    QuantumState,
    SingleQubitDensity,
    apply_1q,
    apply_cnot,
    apply_x,
    basis2_transform,
    code_state,
    complement_qubits,
    project,
    purity,
    qubit_probability,
)

BRANCH_CUTOFF = 1e-28


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...] = ()
    slot: int | None = None
    slots: tuple[int, ...] = ()
    table: dict | None = field(default=None, compare=False)
    payload: object = field(default=None, compare=False)


@dataclass
class SyndromeBlock:
    basis: int
    slots: tuple[int, ...]
    table: SyndromeTable
    # measured syndrome value -> qubits that receive a NOT
    actions: dict[int, tuple[int, ...]]


@dataclass
class Circuit:
    gates: list[Gate] = field(default_factory=list)
    blocks: list[SyndromeBlock] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def not_(self, q: int) -> Circuit:
        self.gates.append(Gate("NOT", (q,)))
        return self

    def cnot(self, control: int, target: int) -> Circuit:
        if control == target:
            raise UsageError("CNOT control and target coincide")
        self.gates.append(Gate("CNOT", (control, target)))
        return self

    def rotate(self, q: int) -> Circuit:
        self.gates.append(Gate("ROTATE", (q,)))
        return self

    def measure(self, q: int, slot: int) -> Circuit:
        self.gates.append(Gate("MEASURE", (q,), slot=slot))
        return self

    def controlled_not(self, slots: Sequence[int], table: dict[int, tuple[int, ...]]) -> Circuit:
        """NOT the qubits ``table[v]``, where ``v`` is the bit pattern read from ``slots``."""
        self.gates.append(Gate("CNOT_IF", slots=tuple(slots), table=dict(table)))
        return self

    def reset(self, q: int, slot: int) -> Circuit:
        """Return ``q`` to 0 using the outcome already recorded in ``slot``."""
        self.gates.append(Gate("RESET", (q,), slot=slot))
        return self

    def error(self, spec) -> Circuit:
        """Hook for an error process applied mid-circuit."""
        self.gates.append(Gate("ERROR", payload=spec))
        return self

    def extend(self, other: Circuit) -> Circuit:
        self.gates.extend(other.gates)
        self.blocks.extend(other.blocks)
        return self

    @property
    def n_slots(self) -> int:
        used = [g.slot for g in self.gates if g.slot is not None]
        used += [s for g in self.gates for s in g.slots]
        return max(used) + 1 if used else 0

    def validate(self, n_qubits: int) -> None:
        written: set[int] = set()
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < n_qubits:
                    raise UsageError(f"{g.kind} on qubit {q} outside 0..{n_qubits - 1}")
            if g.kind == "CNOT_IF":
                for qs in g.table.values():
                    for q in qs:
                        if not 0 <= q < n_qubits:
                            raise UsageError(f"controlled NOT on qubit {q} out of range")
            reads = list(g.slots) + ([g.slot] if g.kind == "RESET" else [])
            for s in reads:
                if s not in written:
                    raise UsageError(f"slot {s} read before it is written")
            if g.kind == "MEASURE":
                written.add(g.slot)


@dataclass
class Branch:
    probability: float
    state: QuantumState
    record: dict[int, int]


def _read(record: dict[int, int], slots: Sequence[int]) -> int:
    v = 0
    for s in slots:
        v = (v << 1) | record[s]
    return v


def simulate(
    circuit: Circuit,
    state: QuantumState,
    mode: str = "branch",
    rng: np.random.Generator | None = None,
) -> list[Branch]:
    """Run ``circuit`` on ``state``.

    In ``branch`` mode every measurement splits each live branch in two;
    branches whose weight falls below ``BRANCH_CUTOFF`` are dropped. In
    ``sample`` mode a single branch survives with probability 1.
    """
    if mode not in ("branch", "sample"):
        raise UsageError(f"unknown measurement mode {mode!r}")
    if mode == "sample" and rng is None:
        raise UsageError("sampled measurement needs a seeded generator")
    nq = state.n_qubits
    circuit.validate(nq)
    live = [(1.0, state.amplitudes, {})]
    for g in circuit.gates:
        nxt = []
        for prob, amps, rec in live:
            if g.kind == "NOT":
                nxt.append((prob, apply_x(amps, nq, g.qubits[0]), rec))
            elif g.kind == "CNOT":
                nxt.append((prob, apply_cnot(amps, nq, *g.qubits), rec))
            elif g.kind == "ROTATE":
                nxt.append((prob, apply_1q(amps, nq, g.qubits[0], HADAMARD), rec))
            elif g.kind == "MEASURE":
                q = g.qubits[0]
                p = qubit_probability(amps, nq, q)
                if mode == "sample":
                    outcome = int(rng.random() < p[1] / (p[0] + p[1]))
                    picks = [outcome]
                else:
                    picks = [o for o in (0, 1) if p[o] * prob > BRANCH_CUTOFF]
                for o in picks:
                    proj = project(amps, nq, q, o) / np.sqrt(p[o])
                    weight = prob if mode == "sample" else prob * p[o]
                    nxt.append((weight, proj, {**rec, g.slot: o}))
            elif g.kind == "CNOT_IF":
                for q in g.table.get(_read(rec, g.slots), ()):
                    amps = apply_x(amps, nq, q)
                nxt.append((prob, amps, rec))
            elif g.kind == "RESET":
                if rec[g.slot]:
                    amps = apply_x(amps, nq, g.qubits[0])
                nxt.append((prob, amps, rec))
            elif g.kind == "ERROR":
                nxt.append((prob, _apply_error(state.replace(amps), g.payload).amplitudes, rec))
            else:
                raise UsageError(f"unknown gate {g.kind}")
        live = nxt
    return [Branch(p, state.replace(a), r) for p, a, r in live]


def _apply_error(s: QuantumState, spec) -> QuantumState:
    if isinstance(spec, channels.PhaseErrorSpec):
        return channels.apply_phase_errors(s, spec)
    if isinstance(spec, channels.EntangleSpec):
        return channels.apply_entangle(s, spec)
    if isinstance(spec, channels.DefectionSpec):
        return channels.apply_defection(s, spec)
    raise UsageError(f"unsupported error spec {type(spec).__name__}")


def branch_density(branches: Sequence[Branch]) -> np.ndarray:
    """Probability-weighted system density over all branches."""
    return sum(b.probability * b.state.system_density() for b in branches)


def qubit_density(branches: Sequence[Branch], qubit: int) -> np.ndarray:
    rho = np.zeros((2, 2), dtype=complex)
    for b in branches:
        s = b.state
        t = np.moveaxis(s.amplitudes.reshape((2,) * s.n_qubits), qubit, 0).reshape(2, -1)
        rho += b.probability * (t @ t.conj().T)
    return rho


# -- encoding ------------------------------------------------------------------------


@dataclass(frozen=True)
class EncoderPlan:
    """Where the logical qubits sit and which coset offset each one selects."""

    generator: BinaryMatrix  # reduced rows of C
    pivots: tuple[int, ...]  # pivot column of each row of ``generator``
    offsets: BinaryMatrix  # one coset offset per logical qubit
    logical_positions: tuple[int, ...]

    def offset_for(self, v: int) -> BitWord:
        """Offset of the coset storing logical basis value ``v`` (first logical qubit = MSB)."""
        K = self.offsets.m
        word = 0
        for i in range(K):
            if (v >> (K - 1 - i)) & 1:
                word ^= self.offsets.rows[i]
        return BitWord(word, self.generator.n)


def encoder_plan(css: CssTriple) -> EncoderPlan:
    n = css.n
    red, rank, pivots = row_reduce(css.c.generator)
    rows = red.rows[:rank]
    basis = list(rows)
    reps = []
    for r in css.c_plus.generator.rows:
        if len(reps) == css.K:
            break
        if BinaryMatrix(tuple(basis) + (r,), n).rank == len(basis) + 1:
            basis.append(r)
            reps.append(r)
    # clear C's pivot columns so the rotated pivot qubits start in |0>
    cleared = []
    for r in reps:
        for row, p in zip(rows, pivots):
            if r >> (n - 1 - p) & 1:
                r ^= row
        cleared.append(r)
    off_red, _, off_pivots = row_reduce(BinaryMatrix(tuple(cleared), n))
    return EncoderPlan(BinaryMatrix(rows, n), tuple(pivots), off_red, tuple(off_pivots))


def build_encoder(css: CssTriple) -> Circuit:
    """Circuit taking logical inputs at ``encoder_plan(css).logical_positions`` to
    the matching superposition of cosets of C; all other system qubits start at 0.
    """
    plan = encoder_plan(css)
    circ = Circuit()
    for q, off in zip(plan.logical_positions, plan.offsets):
        for t in off.support():
            if t != q:
                circ.cnot(q, t)
    for p in plan.pivots:
        circ.rotate(p)
    for p, row in zip(plan.pivots, plan.generator):
        for t in row.support():
            if t != p:
                circ.cnot(p, t)
    return circ


def logical_input(css: CssTriple, logical: Sequence[complex], n_env: int = 0, n_anc: int = 0) -> QuantumState:
    """Unencoded input: logical amplitudes on the designated qubits, zeros elsewhere."""
    plan = encoder_plan(css)
    K = css.K
    logical = np.asarray(logical, dtype=complex)
    if logical.shape != (1 << K,):
        raise UsageError(f"expected {1 << K} logical amplitudes")
    if abs(np.linalg.norm(logical) - 1) > 1e-10:
        raise UsageError("logical amplitudes must have unit norm")
    terms = {}
    for v, c in enumerate(logical):
        word = 0
        for i, q in enumerate(plan.logical_positions):
            if (v >> (K - 1 - i)) & 1:
                word |= 1 << (css.n - 1 - q)
        terms[BitWord(word, css.n)] = c
    return QuantumState.from_words(terms, css.n, n_env, n_anc)


def coset_states(css: CssTriple) -> list[np.ndarray]:
    """Normalized basis-1 coset states, one per logical basis value."""
    plan = encoder_plan(css)
    return [code_state(css.c.generator, plan.offset_for(v)).amplitudes for v in range(1 << css.K)]


@dataclass
class EncodedBlock:
    css: CssTriple
    logical: np.ndarray
    state: QuantumState

    def ideal(self) -> np.ndarray:
        """The encoded system vector built directly from the coset states."""
        return sum(c * s for c, s in zip(self.logical, coset_states(self.css)))

    def residual(self) -> float:
        """Weight of the system state outside the span of the coset states."""
        rho = self.state.system_density()
        inside = sum(np.vdot(s, rho @ s).real for s in coset_states(self.css))
        return float(1 - inside)


def encode(css: CssTriple, logical: Sequence[complex], n_env: int = 0, n_anc: int = 0) -> EncodedBlock:
    start = logical_input(css, logical, n_env, n_anc)
    (branch,) = simulate(build_encoder(css), start)
    return EncodedBlock(css, np.asarray(logical, dtype=complex), branch.state)


# -- correction ----------------------------------------------------------------------


def measured_checks(check: BinaryMatrix) -> tuple[BinaryMatrix, tuple[int, ...]]:
    """Check rows in a form where each row owns a qubit no other row touches.

    The given rows are kept if every row already has such a unit column
    (leftmost free choice); otherwise the rows are row-reduced and the pivots used.
    """
    n = check.n
    if check.rank == check.m:
        owners: list[int] = []
        for i, r in enumerate(check.rows):
            others = 0
            for j, o in enumerate(check.rows):
                if j != i:
                    others |= o
            unit = [c for c in range(n) if (r >> (n - 1 - c)) & 1 and not (others >> (n - 1 - c)) & 1]
            if not unit:
                break
            owners.append(unit[0])
        else:
            return check, tuple(owners)
    red, rank, pivots = row_reduce(check)
    return BinaryMatrix(red.rows[:rank], n), pivots


def _code_for_basis(css: CssTriple, basis: int) -> LinearCode:
    if basis == 1:
        return css.c_plus
    if basis == 2:
        return css.c_perp
    raise UsageError(f"basis must be 1 or 2, got {basis}")


def build_corrector(
    css: CssTriple,
    basis: int,
    style: str = "in-place",
    reencode: bool = True,
    slot_offset: int = 0,
    anc_start: int | None = None,
) -> Circuit:
    """Syndrome extraction plus correction for one basis.

    Basis 1 checks the rows of ``c_plus``'s check matrix; basis 2 checks
    ``c_perp``'s, with every system qubit rotated before and after.
    ``in-place`` computes each check onto a qubit of the block itself, measures,
    fixes, resets and (if ``reencode``) recomputes the checked qubits.
    ``ancilla`` writes the checks onto fresh qubits starting at ``anc_start``.
    """
    code = _code_for_basis(css, basis)
    n = css.n
    circ = Circuit()
    if basis == 2:
        for q in range(n):
            circ.rotate(q)
    if style == "in-place":
        check, owners = measured_checks(code.check)
        table = build_syndrome_table(code, check)
        slots = tuple(slot_offset + i for i in range(check.m))
        fan = []
        for row, p in zip(check, owners):
            fan += [(c, p) for c in row.support() if c != p]
        for c, p in fan:
            circ.cnot(c, p)
        for p, s in zip(owners, slots):
            circ.measure(p, s)
        skip = set(owners)
        actions = {s: tuple(q for q in BitWord(e, n).support() if q not in skip) for s, e in table.table.items()}
        circ.controlled_not(slots, actions)
        for p, s in zip(owners, slots):
            circ.reset(p, s)
        if reencode:
            for c, p in fan:
                circ.cnot(c, p)
    elif style == "ancilla":
        check = code.check
        table = build_syndrome_table(code, check)
        anc_start = n if anc_start is None else anc_start
        slots = tuple(slot_offset + i for i in range(check.m))
        for i, row in enumerate(check):
            for c in row.support():
                circ.cnot(c, anc_start + i)
        for i, s in enumerate(slots):
            circ.measure(anc_start + i, s)
        actions = {s: BitWord(e, n).support() for s, e in table.table.items()}
        circ.controlled_not(slots, actions)
        for i, s in enumerate(slots):
            circ.reset(anc_start + i, s)
    else:
        raise UsageError(f"unknown corrector style {style!r}")
    if basis == 2:
        for q in range(n):
            circ.rotate(q)
    circ.blocks.append(SyndromeBlock(basis, slots, table, actions))
    return circ


def ancilla_count(css: CssTriple, style: str) -> int:
    if style != "ancilla":
        return 0
    return max(css.n - css.k1, css.n - css.k2)


@dataclass(frozen=True)
class CorrectionOutcome:
    basis: int
    syndrome: BitWord
    correction: BitWord
    probability: float


def outcomes(circuit: Circuit, branch: Branch) -> list[CorrectionOutcome]:
    out = []
    for blk in circuit.blocks:
        s = BitWord(_read(branch.record, blk.slots), len(blk.slots))
        out.append(CorrectionOutcome(blk.basis, s, blk.table.lookup(s), branch.probability))
    return out


def full_corrector(css: CssTriple, style: str = "in-place", n_env: int = 0) -> Circuit:
    """Basis-1 correction followed by basis-2 correction."""
    anc = css.n + n_env
    c1 = build_corrector(css, 1, style, anc_start=anc)
    c2 = build_corrector(css, 2, style, slot_offset=c1.n_slots, anc_start=anc)
    return c1.extend(c2)


# -- experiments ---------------------------------------------------------------------


def phase_alpha_closed_form(phis: Sequence[float], eps: float) -> complex:
    """Coherence factor after three-qubit phase correction.

    The sine product enters with a plus sign, which is what makes a single
    unencoded qubit come out as ``exp(i eps phi)`` under the same rotation.
    """
    c = [np.cos(eps * p) for p in phis]
    s = [np.sin(eps * p) for p in phis]
    return 0.5 * (sum(c) - c[0] * c[1] * c[2] + 1j * s[0] * s[1] * s[2])


def entangle_alpha_closed_form(eps: Sequence[float]) -> float:
    e0, e1, e2 = eps
    return 1 - 0.5 * (e0 * e1 + e0 * e2 + e1 * e2) + 0.5 * e0 * e1 * e2


def _three_qubit_decode(block_state: QuantumState) -> tuple[Circuit, list[Branch]]:
    css = three_qubit_triple()
    circ = build_corrector(css, 2, "in-place", reencode=False)
    return circ, simulate(circ, block_state)


def _control_qubit(css: CssTriple) -> int:
    """The qubit left holding the decoded state by the basis-2 in-place corrector."""
    _, owners = measured_checks(css.c_perp.check)
    (free,) = [q for q in range(css.n) if q not in owners]
    return free


def run_phase_error_experiment(
    phi0: float, phi1: float, phi2: float, eps: float, a: complex, b: complex
) -> SingleQubitDensity:
    """Three-qubit scheme under independent phase rotations.

    Encode, rotate each qubit, run the basis-2 corrector up to (not including)
    re-encoding, and return the averaged density of the qubit holding the
    decoded state.
    """
    css = three_qubit_triple()
    block = encode(css, [a, b])
    spec = channels.PhaseErrorSpec((0, 1, 2), (phi0, phi1, phi2), eps)
    damaged = channels.apply_phase_errors(block.state, spec)
    _, branches = _three_qubit_decode(damaged)
    rho = qubit_density(branches, _control_qubit(css))
    return SingleQubitDensity(rho, (complex(a), complex(b)))


def run_purity_amplification(
    eps0: float, eps1: float, eps2: float, a: complex, b: complex
) -> SingleQubitDensity:
    """Three-qubit scheme with each qubit entangled to its own environment qubit."""
    css = three_qubit_triple()
    block = encode(css, [a, b], n_env=3)
    strengths = (eps0, eps1, eps2)
    active = [i for i in range(3) if strengths[i] != 0]
    if any(not 0 <= e <= 1 for e in strengths):
        raise UsageError("strengths must lie in [0, 1]")
    spec = channels.EntangleSpec(tuple(active), tuple(strengths[i] for i in active), tuple(active))
    damaged = channels.apply_entangle(block.state, spec)
    _, branches = _three_qubit_decode(damaged)
    rho = qubit_density(branches, _control_qubit(css))
    return SingleQubitDensity(rho, (complex(a), complex(b)))


def coset_sum_identity_check(c: LinearCode, positions: Sequence[int], j: int) -> float:
    """Max amplitude gap between a positional coset and the signed sum of
    basis-2-flipped copies of the whole code (both sides unnormalized)."""
    positions = list(positions)
    x = len(positions)
    n = c.n
    if n > 12:
        raise UsageError("identity check limited to n <= 12")
    cosets = coset_decompose(c, positions)
    if not 0 <= j < len(cosets):
        raise UsageError(f"coset index {j} outside 0..{len(cosets) - 1}")
    lhs = np.zeros(1 << n, dtype=complex)
    lhs[cosets[j].words().astype(np.int64)] = 1
    scale = np.sqrt(1 << c.k)
    base = code_state(c.generator)
    rhs = np.zeros(1 << n, dtype=complex)
    for l in range(1 << x):
        mask = BitWord.from_positions(n, [positions[i] for i in range(x) if (l >> (x - 1 - i)) & 1])
        flipped = basis2_transform(complement_qubits(basis2_transform(base), mask))
        sign = -1 if (j & l).bit_count() % 2 else 1
        rhs += sign * scale * flipped.amplitudes
    rhs /= 1 << x
    return float(np.max(np.abs(lhs - rhs)))


@dataclass
class RecoveryResult:
    fidelity: float
    purity: float
    guaranteed: bool
    branch_weight: float
    syndromes: list[dict]

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "purity": self.purity,
            "guaranteed": self.guaranteed,
            "branch_weight": self.branch_weight,
            "alpha": None,
            "syndromes": self.syndromes,
        }


def run_recovery(
    css: CssTriple,
    logical: Sequence[complex],
    defect: channels.DefectionSpec,
    style: str = "in-place",
    mode: str = "branch",
    seed: int | None = None,
) -> RecoveryResult:
    """Encode, defect, correct in basis 1 then basis 2, and compare to the encoded state.

    ``guaranteed`` is False when more qubits defect than both bases can
    correct; the numbers are still reported.
    """
    n_env = defect.env_offset + defect.n_env
    n_anc = ancilla_count(css, style)
    block = encode(css, logical, n_env=n_env, n_anc=n_anc)
    target = block.ideal()
    damaged = channels.apply_defection(block.state, defect)
    circ = full_corrector(css, style, n_env)
    rng = channels.make_rng(seed, 2) if mode == "sample" else None
    if mode == "sample" and seed is None:
        raise UsageError("sampled mode needs a seed")
    branches = simulate(circ, damaged, mode, rng)
    rho = branch_density(branches)
    fid = float(np.vdot(target, rho @ target).real)
    syndromes = []
    for br in branches:
        for o in outcomes(circ, br):
            syndromes.append({
                "basis": o.basis,
                "syndrome": str(o.syndrome),
                "correction": str(o.correction),
                "probability": o.probability,
            })
    return RecoveryResult(
        fidelity=fid,
        purity=purity(rho),
        guaranteed=defect.x <= css.correctable,
        branch_weight=float(sum(b.probability for b in branches)),
        syndromes=syndromes,
    )
