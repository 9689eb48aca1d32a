"""Error processes acting on a :class:`~cssqec.qstate.QuantumState`.

Three families: diagonal phase rotations, the two-level environment
entanglers ``W_j``, and general defection of a qubit subset described by an
isometry from the affected qubits into (affected qubits) x (environment).
Environment indices in the specs are relative to the environment register.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .exceptions import ConstructionError, UsageError
from .qstate import QuantumState, apply_1q, apply_2q

UNITARY_TOL = 1e-12
ISOMETRY_TOL = 1e-10
MAX_MATERIALIZED_DEFECTORS = 4


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; ``stream`` selects an independent substream."""
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def phase_matrix(angle: float, eps: float) -> np.ndarray:
    return np.diag([np.exp(0.5j * eps * angle), np.exp(-0.5j * eps * angle)])


def entangle_matrix(eps: float) -> np.ndarray:
    """4x4 unitary on (qubit, environment qubit); the environment is rotated only when the qubit is 1."""
    s = np.sqrt(2 * eps - eps * eps)
    w = np.eye(4, dtype=complex)
    w[2:, 2:] = [[1 - eps, s], [-s, 1 - eps]]
    return w


def _check_unitary(u: np.ndarray) -> None:
    if np.max(np.abs(u.conj().T @ u - np.eye(len(u)))) > UNITARY_TOL:
        raise ConstructionError("operator is not unitary")


@dataclass(frozen=True)
class PhaseErrorSpec:
    qubits: tuple[int, ...]
    angles: tuple[float, ...]
    eps: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if len(self.qubits) != len(self.angles):
            raise UsageError("one angle per qubit")
        if not 0 <= self.eps <= 1:
            raise UsageError(f"eps = {self.eps} outside [0, 1]")
        for a in self.angles:
            _check_unitary(phase_matrix(a, self.eps))

    def to_dict(self) -> dict:
        return {"type": "phase", "qubits": list(self.qubits),
                "params": {"angles": list(self.angles), "eps": self.eps}, "seed": None}


@dataclass(frozen=True)
class EntangleSpec:
    qubits: tuple[int, ...]
    strengths: tuple[float, ...]
    env: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "strengths", tuple(float(e) for e in self.strengths))
        object.__setattr__(self, "env", tuple(int(e) for e in self.env))
        if not len(self.qubits) == len(self.strengths) == len(self.env):
            raise UsageError("qubits, strengths and env must have equal length")
        for e in self.strengths:
            # a zero strength is expressed by leaving the qubit out
            if not 0 < e <= 1:
                raise UsageError(f"strength {e} outside (0, 1]")
            _check_unitary(entangle_matrix(e))

    def to_dict(self) -> dict:
        return {"type": "entangle", "qubits": list(self.qubits),
                "params": {"strengths": list(self.strengths), "env": list(self.env)}, "seed": None}


@dataclass(frozen=True)
class DefectionSpec:
    """Arbitrary error of the qubits in ``qubits``.

    ``isometry`` has shape ``(2**x * 4**x, 2**x)``: column ``j`` is the image
    of ``|j>|e_0>`` with rows indexed by ``(output word, environment index)``.
    The environment register block starts at ``env_offset`` and holds ``2x``
    qubits. When only ``seed`` is given, a random isometry is drawn lazily,
    so large sampled sets can be inspected without materializing it.
    """

    qubits: tuple[int, ...]
    env_offset: int = 0
    isometry_matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise UsageError("repeated qubit in defection set")
        if self.isometry_matrix is not None:
            v = np.asarray(self.isometry_matrix, dtype=complex)
            dim = 1 << self.x
            if v.shape != (dim * dim * dim, dim):
                raise ConstructionError(f"isometry shape {v.shape}, expected {(dim ** 3, dim)}")
            if np.max(np.abs(v.conj().T @ v - np.eye(dim))) > ISOMETRY_TOL:
                raise ConstructionError("defection map is not an isometry")
            object.__setattr__(self, "isometry_matrix", v)

    @property
    def x(self) -> int:
        return len(self.qubits)

    @property
    def n_env(self) -> int:
        return 2 * self.x

    @cached_property
    def isometry(self) -> np.ndarray:
        if self.isometry_matrix is not None:
            return self.isometry_matrix
        if self.x == 0:
            return np.ones((1, 1), dtype=complex)
        if self.seed is None:
            raise ConstructionError("defection spec has neither an isometry nor a seed")
        if self.x > MAX_MATERIALIZED_DEFECTORS:
            raise ConstructionError(f"{self.x} defecting qubits is too many to simulate")
        return random_isometry(self.x, make_rng(self.seed, 1))

    def env_state(self, j: int, k: int) -> np.ndarray:
        """Environment vector attached to flip pattern ``k`` of input word ``j``."""
        dim = 1 << self.x
        v = self.isometry.reshape(dim, dim * dim, dim)
        return v[j ^ k, :, j].copy()

    @classmethod
    def from_env_states(cls, qubits: Sequence[int], states: np.ndarray, env_offset: int = 0) -> DefectionSpec:
        """``states[j, k]`` is the environment vector paired with ``|j ^ k>``."""
        x = len(qubits)
        dim = 1 << x
        states = np.asarray(states, dtype=complex)
        if states.shape != (dim, dim, dim * dim):
            raise ConstructionError(f"env states shape {states.shape}, expected {(dim, dim, dim * dim)}")
        v = np.zeros((dim, dim * dim, dim), dtype=complex)
        for j in range(dim):
            for k in range(dim):
                v[j ^ k, :, j] = states[j, k]
        return cls(tuple(qubits), env_offset, v.reshape(dim ** 3, dim))

    @classmethod
    def from_unitary(cls, qubit: int, u: np.ndarray, env_offset: int = 0) -> DefectionSpec:
        """Single-qubit unitary error that leaves the environment alone."""
        u = np.asarray(u, dtype=complex)
        _check_unitary(u)
        v = np.zeros((2, 4, 2), dtype=complex)
        v[:, 0, :] = u
        return cls((qubit,), env_offset, v.reshape(8, 2))

    @classmethod
    def from_entangle(cls, qubit: int, eps: float, env_offset: int = 0) -> DefectionSpec:
        """The entangler ``W`` with eps, acting on the second qubit of the environment pair."""
        w = entangle_matrix(eps)
        v = np.zeros((2, 4, 2), dtype=complex)
        for j in range(2):
            for jo in range(2):
                for e in range(2):
                    v[jo, e, j] = w[2 * jo + e, 2 * j]
        return cls((qubit,), env_offset, v.reshape(8, 2))

    @classmethod
    def random(cls, qubits: Sequence[int], seed: int, env_offset: int = 0) -> DefectionSpec:
        spec = cls(tuple(qubits), env_offset, None, seed)
        spec.isometry  # materialize now so size errors surface here
        return spec

    def to_dict(self) -> dict:
        d = {"type": "defection", "qubits": list(self.qubits),
             "params": {"env_offset": self.env_offset}, "seed": self.seed}
        if self.seed is None and self.x:
            v = self.isometry
            d["params"]["isometry"] = [[[z.real, z.imag] for z in row] for row in v]
        return d


def random_isometry(x: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian matrix with orthonormalized columns, shape ``(8**x, 2**x)``."""
    dim = 1 << x
    g = rng.standard_normal((dim ** 3, dim)) + 1j * rng.standard_normal((dim ** 3, dim))
    q, r = np.linalg.qr(g)
    # fix column phases so the result is a function of g alone
    return q * (np.diag(r) / np.abs(np.diag(r)))


def apply_phase_errors(s: QuantumState, spec: PhaseErrorSpec) -> QuantumState:
    amps = s.amplitudes
    for q, a in zip(spec.qubits, spec.angles):
        amps = apply_1q(amps, s.n_qubits, q, phase_matrix(a, spec.eps))
    return s.replace(amps)


def apply_entangle(s: QuantumState, spec: EntangleSpec) -> QuantumState:
    amps = s.amplitudes
    for q, e, env in zip(spec.qubits, spec.strengths, spec.env):
        amps = apply_2q(amps, s.n_qubits, q, s.env_qubit(env), entangle_matrix(e))
    return s.replace(amps)


def apply_defection(s: QuantumState, spec: DefectionSpec) -> QuantumState:
    """Apply the defection; the spec's environment block must be in ``|0...0>``."""
    x = spec.x
    if x == 0:
        return s
    if spec.env_offset + spec.n_env > s.n_env:
        raise UsageError(f"defection needs environment qubits {spec.env_offset}..{spec.env_offset + spec.n_env - 1}")
    env = [s.env_qubit(spec.env_offset + i) for i in range(spec.n_env)]
    nq = s.n_qubits
    front = list(spec.qubits) + env
    t = np.moveaxis(s.amplitudes.reshape((2,) * nq), front, range(len(front)))
    shape = t.shape
    dim = 1 << x
    block = t.reshape(dim, dim * dim, -1)
    if np.max(np.abs(block[:, 1:, :]), initial=0.0) > 1e-12:
        raise UsageError("defection environment block is not fresh")
    out = (spec.isometry @ block[:, 0, :]).reshape(shape)
    out = np.moveaxis(out, range(len(front)), front)
    return s.replace(out.reshape(-1))


def sample_stochastic_defection(n: int, p: float, seed: int, env_offset: int = 0) -> DefectionSpec:
    """Each of ``n`` qubits defects independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise UsageError(f"p = {p} outside [0, 1]")
    mask = make_rng(seed, 0).random(n) < p
    return DefectionSpec(tuple(int(q) for q in np.flatnonzero(mask)), env_offset, None, seed)


def spec_to_json(spec) -> str:
    return json.dumps(spec.to_dict(), sort_keys=True)


def spec_from_dict(d: dict):
    kind = d.get("type")
    params = d.get("params", {})
    qubits = d.get("qubits", [])
    if kind == "phase":
        return PhaseErrorSpec(qubits, params["angles"], params.get("eps", 1.0))
    if kind == "entangle":
        return EntangleSpec(qubits, params["strengths"], params["env"])
    if kind == "defection":
        offset = params.get("env_offset", 0)
        if "isometry" in params:
            v = np.array([[complex(re, im) for re, im in row] for row in params["isometry"]])
            return DefectionSpec(qubits, offset, v)
        if d.get("seed") is None and qubits:
            raise UsageError("random defection needs a seed")
        return DefectionSpec.random(qubits, d.get("seed") or 0, offset)
    raise UsageError(f"unknown error spec type {kind!r}")


def spec_from_json(text: str):
    return spec_from_dict(json.loads(text))
