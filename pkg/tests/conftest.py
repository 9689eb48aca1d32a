import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


# Brute-force oracles. They use only numpy and itertools, never the package.

def words_of(n):
    return [tuple(bits) for bits in itertools.product((0, 1), repeat=n)]


def word_str(bits):
    return "".join(str(b) for b in bits)


def dot2(u, v):
    return sum(a & b for a, b in zip(u, v)) % 2


def brute_span(rows, n):
    """All XOR combinations of ``rows`` (bit tuples), as a set of strings."""
    out = set()
    for coeffs in itertools.product((0, 1), repeat=len(rows)):
        w = [0] * n
        for c, r in zip(coeffs, rows):
            if c:
                w = [a ^ b for a, b in zip(w, r)]
        out.add(word_str(w))
    return out


def brute_dual(rows, n):
    return {word_str(w) for w in words_of(n) if all(dot2(w, r) == 0 for r in rows)}


def bits(s):
    return tuple(int(c) for c in s)


H1 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def kron_all(mats):
    return reduce(np.kron, mats)


def hadamard_n(n):
    return kron_all([H1] * n)


def ket(word):
    v = np.zeros(1 << len(word), dtype=complex)
    v[int(word, 2)] = 1
    return v


def random_pair(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
