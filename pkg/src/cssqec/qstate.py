"""Dense state vectors over system, environment and ancilla registers.

Qubit ``q`` contributes ``2**(N - 1 - q)`` to a basis index, with system
qubits first, then environment, then ancilla. Basis 2 is the Hadamard-rotated
basis: ``|0bar> = (|0> + |1>)/sqrt2`` and ``|1bar> = (|0> - |1>)/sqrt2``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import CapabilityError, UsageError
from .gf2 import BinaryMatrix, BitWord, span

MAX_QUBITS = 20
NORM_TOL = 1e-10
SUPPORT_TOL = 1e-8

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# -- kernels on raw amplitude arrays -------------------------------------------------


def apply_1q(amps: np.ndarray, nq: int, q: int, u: np.ndarray) -> np.ndarray:
    t = amps.reshape((2,) * nq)
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def apply_2q(amps: np.ndarray, nq: int, q0: int, q1: int, u: np.ndarray) -> np.ndarray:
    """Apply a 4x4 ``u`` with ``q0`` as the more significant factor."""
    t = amps.reshape((2,) * nq)
    t = np.tensordot(u.reshape(2, 2, 2, 2), t, axes=([2, 3], [q0, q1]))
    t = np.moveaxis(t, [0, 1], [q0, q1])
    return t.reshape(-1)


def apply_x(amps: np.ndarray, nq: int, q: int) -> np.ndarray:
    return np.flip(amps.reshape((2,) * nq), axis=q).reshape(-1).copy()


def apply_cnot(amps: np.ndarray, nq: int, control: int, target: int) -> np.ndarray:
    t = amps.reshape((2,) * nq).copy()
    idx = [slice(None)] * nq
    idx[control] = 1
    sub = t[tuple(idx)]
    tax = target - (1 if target > control else 0)
    t[tuple(idx)] = np.flip(sub, axis=tax)
    return t.reshape(-1)


def qubit_probability(amps: np.ndarray, nq: int, q: int) -> tuple[float, float]:
    t = np.abs(amps.reshape((2,) * nq)) ** 2
    p = t.sum(axis=tuple(i for i in range(nq) if i != q))
    return float(p[0]), float(p[1])


def project(amps: np.ndarray, nq: int, q: int, value: int) -> np.ndarray:
    t = amps.reshape((2,) * nq).copy()
    idx = [slice(None)] * nq
    idx[q] = 1 - value
    t[tuple(idx)] = 0
    return t.reshape(-1)


def hadamard_all(amps: np.ndarray, nq: int, qubits: Iterable[int]) -> np.ndarray:
    for q in qubits:
        amps = apply_1q(amps, nq, q, HADAMARD)
    return amps


# -- states --------------------------------------------------------------------------


@dataclass
class QuantumState:
    amplitudes: np.ndarray
    n_sys: int
    n_env: int = 0
    n_anc: int = 0

    def __post_init__(self):
        total = self.n_sys + self.n_env + self.n_anc
        if total > MAX_QUBITS:
            raise CapabilityError(f"{total} qubits exceeds the {MAX_QUBITS}-qubit cap")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.size != 1 << total:
            raise UsageError(f"expected {1 << total} amplitudes, got {self.amplitudes.size}")
        norm = np.vdot(self.amplitudes, self.amplitudes).real
        if abs(norm - 1) > NORM_TOL:
            raise UsageError(f"state norm {norm} is not 1")

    @property
    def n_qubits(self) -> int:
        return self.n_sys + self.n_env + self.n_anc

    def env_qubit(self, i: int) -> int:
        if not 0 <= i < self.n_env:
            raise UsageError(f"environment qubit {i} out of range")
        return self.n_sys + i

    def anc_qubit(self, i: int) -> int:
        if not 0 <= i < self.n_anc:
            raise UsageError(f"ancilla qubit {i} out of range")
        return self.n_sys + self.n_env + i

    def replace(self, amplitudes: np.ndarray) -> QuantumState:
        return QuantumState(amplitudes, self.n_sys, self.n_env, self.n_anc)

    @classmethod
    def zero(cls, n_sys: int, n_env: int = 0, n_anc: int = 0) -> QuantumState:
        amps = np.zeros(1 << (n_sys + n_env + n_anc), dtype=complex)
        amps[0] = 1
        return cls(amps, n_sys, n_env, n_anc)

    @classmethod
    def from_words(cls, terms: dict, n_sys: int, n_env: int = 0, n_anc: int = 0) -> QuantumState:
        """Normalized superposition of system words; registers start in |0...0>."""
        shift = n_env + n_anc
        amps = np.zeros(1 << (n_sys + shift), dtype=complex)
        for word, amp in terms.items():
            w = BitWord.from_str(word) if isinstance(word, str) else word
            if w.n != n_sys:
                raise UsageError(f"word {w} is not {n_sys} bits")
            amps[w.value << shift] += amp
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise UsageError("empty superposition")
        return cls(amps / norm, n_sys, n_env, n_anc)

    @classmethod
    def uniform(cls, words: Sequence[int], n_sys: int, n_env: int = 0, n_anc: int = 0) -> QuantumState:
        shift = n_env + n_anc
        amps = np.zeros(1 << (n_sys + shift), dtype=complex)
        idx = np.asarray(words, dtype=np.int64) << shift
        amps[idx] = 1
        return cls(amps / np.sqrt(len(set(int(i) for i in idx))), n_sys, n_env, n_anc)

    def with_registers(self, n_env: int = 0, n_anc: int = 0) -> QuantumState:
        """Append fresh |0> environment and ancilla qubits (only to a bare system state)."""
        if self.n_env or self.n_anc:
            raise UsageError("state already carries registers")
        extra = np.zeros(1 << (n_env + n_anc), dtype=complex)
        extra[0] = 1
        return QuantumState(np.kron(self.amplitudes, extra), self.n_sys, n_env, n_anc)

    def system_words(self) -> np.ndarray:
        """System-word label of each basis index."""
        return np.arange(self.amplitudes.size) >> (self.n_env + self.n_anc)

    def system_matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(1 << self.n_sys, -1)

    def system_density(self) -> np.ndarray:
        m = self.system_matrix()
        return m @ m.conj().T


@dataclass(frozen=True)
class PhasedGenerator:
    """Generator rows, each carrying a phase factor ``exp(i*phi_j)``."""

    matrix: BinaryMatrix
    phases: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if len(self.phases) != self.matrix.m:
            raise UsageError(f"{len(self.phases)} phases for {self.matrix.m} rows")

    @classmethod
    def unphased(cls, matrix: BinaryMatrix) -> PhasedGenerator:
        return cls(matrix, (0.0,) * matrix.m)

    def combine(self, rows: Sequence[int]) -> tuple[complex, BitWord]:
        """XOR of the listed rows and the product of their phases.

        A row listed twice cancels, word and phase both.
        """
        used = [j for j in set(rows) if list(rows).count(j) % 2]
        word = 0
        phase = 0.0
        for j in used:
            word ^= self.matrix.rows[j]
            phase += self.phases[j]
        return complex(np.exp(1j * phase)), BitWord(word, self.matrix.n)


@dataclass(frozen=True)
class SingleQubitDensity:
    """A 2x2 density matrix, optionally tied to the pure state ``a|0> + b|1>``.

    With a reference, ``alpha`` is the factor by which the off-diagonal
    element differs from the pure value ``a * conj(b)``.
    """

    matrix: np.ndarray
    reference: tuple[complex, complex] | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise UsageError("expected a 2x2 matrix")
        if np.max(np.abs(m - m.conj().T)) > 1e-10 or abs(np.trace(m) - 1) > 1e-10:
            raise UsageError("not a Hermitian unit-trace matrix")
        ev = np.linalg.eigvalsh(m)
        if ev.min() < -1e-10 or ev.max() > 1 + 1e-10:
            raise UsageError(f"eigenvalues {ev} outside [0, 1]")
        object.__setattr__(self, "matrix", m)

    @property
    def alpha(self) -> complex:
        if self.reference is None:
            raise UsageError("alpha needs the reference amplitudes a, b")
        a, b = self.reference
        ab = a * np.conj(b)
        if abs(ab) < 1e-12:
            raise UsageError("alpha undefined when a*b = 0")
        return complex(self.matrix[0, 1] / ab)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def with_reference(self, a: complex, b: complex) -> SingleQubitDensity:
        return SingleQubitDensity(self.matrix, (complex(a), complex(b)))


# -- operations ----------------------------------------------------------------------


def basis2_transform(s: QuantumState, qubits: Iterable[int] | None = None) -> QuantumState:
    """Rotate the listed qubits (default: all system qubits) between bases 1 and 2."""
    qubits = range(s.n_sys) if qubits is None else qubits
    return s.replace(hadamard_all(s.amplitudes, s.n_qubits, qubits))


def state_from_generator(g: PhasedGenerator, n_env: int = 0, n_anc: int = 0) -> QuantumState:
    """Equal-weight superposition of all row combinations with their phases."""
    m = g.matrix
    if m.rank != m.m:
        raise UsageError("generator rows must be independent")
    words = np.zeros(1, dtype=np.int64)
    phases = np.ones(1, dtype=complex)
    for row, phi in zip(m.rows, g.phases):
        words = np.concatenate([words, words ^ row])
        phases = np.concatenate([phases, phases * np.exp(1j * phi)])
    shift = n_env + n_anc
    amps = np.zeros(1 << (m.n + shift), dtype=complex)
    amps[words << shift] = phases / np.sqrt(len(words))
    return QuantumState(amps, m.n, n_env, n_anc)


def code_state(generator: BinaryMatrix, offset: BitWord | None = None, n_env: int = 0, n_anc: int = 0) -> QuantumState:
    """Uniform superposition over ``span(generator) ^ offset``."""
    words = span(generator).astype(np.int64)
    if offset is not None:
        words = words ^ offset.value
    return QuantumState.uniform(words, generator.n, n_env, n_anc)


def complement_qubits(s: QuantumState, mask: BitWord) -> QuantumState:
    """Basis-1 NOT on every system qubit set in ``mask``."""
    if mask.n != s.n_sys:
        raise UsageError(f"mask has {mask.n} bits, system has {s.n_sys}")
    amps = s.amplitudes
    for q in mask.support():
        amps = apply_x(amps, s.n_qubits, q)
    return s.replace(amps)


def complement_qubits_basis2(s: QuantumState, mask: BitWord) -> QuantumState:
    """Basis-2 NOT (a sign flip in basis 1) on every masked system qubit."""
    if mask.n != s.n_sys:
        raise UsageError(f"mask has {mask.n} bits, system has {s.n_sys}")
    amps = s.amplitudes
    for q in mask.support():
        amps = apply_1q(amps, s.n_qubits, q, PAULI_Z)
    return s.replace(amps)


def basis2_probabilities(s: QuantumState) -> np.ndarray:
    """Probability of each system word when all system qubits are read in basis 2."""
    rotated = hadamard_all(s.amplitudes, s.n_qubits, range(s.n_sys))
    return (np.abs(rotated.reshape(1 << s.n_sys, -1)) ** 2).sum(axis=1)


def parity_check_probability(s: QuantumState, check: BitWord) -> float:
    """Probability that a basis-2 readout of the system satisfies ``check``."""
    if check.n != s.n_sys:
        raise UsageError(f"check has {check.n} bits, system has {s.n_sys}")
    probs = basis2_probabilities(s)
    words = np.arange(1 << s.n_sys)
    even = np.bitwise_count(words & check.value) % 2 == 0
    return float(probs[even].sum())


def support_in_basis2(s: QuantumState, tol: float = SUPPORT_TOL) -> frozenset[BitWord]:
    probs = basis2_probabilities(s)
    return frozenset(BitWord(int(w), s.n_sys) for w in np.flatnonzero(np.sqrt(probs) > tol))


def basis2_amplitudes(s: QuantumState) -> np.ndarray:
    """Amplitudes of a bare system state in the basis-2 word basis."""
    if s.n_env or s.n_anc:
        raise UsageError("basis-2 amplitudes need a state without registers")
    return hadamard_all(s.amplitudes, s.n_qubits, range(s.n_sys))


def reduced_density(s: QuantumState, qubit: int) -> SingleQubitDensity:
    """Trace out everything except ``qubit`` (any register)."""
    t = s.amplitudes.reshape((2,) * s.n_qubits)
    t = np.moveaxis(t, qubit, 0).reshape(2, -1)
    return SingleQubitDensity(t @ t.conj().T)


def fidelity(a: QuantumState | np.ndarray, b: QuantumState | np.ndarray) -> float:
    """``|<a|b>|**2``; insensitive to global phase."""
    va = a.amplitudes if isinstance(a, QuantumState) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, QuantumState) else np.asarray(b)
    return float(abs(np.vdot(va, vb)) ** 2)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


def dump_csv(s: QuantumState, tol: float = SUPPORT_TOL) -> str:
    buf = io.StringIO()
    buf.write("index,word,re,im\n")
    nq = s.n_qubits
    for i in np.flatnonzero(np.abs(s.amplitudes) > tol):
        a = s.amplitudes[i]
        buf.write(f"{i},{format(int(i), f'0{nq}b')},{a.real:.17g},{a.imag:.17g}\n")
    return buf.getvalue()
