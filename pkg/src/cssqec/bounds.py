"""Rate bounds and survival probabilities for large CSS codes.

Everything here is evaluated in asymptotic form: the ``1 - zeta`` finite-size
factors are dropped.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exceptions import UsageError

BISECTION_TOL = 1e-9


def entropy(x: float) -> float:
    """Binary entropy in bits, with H(0) = H(1) = 0."""
    if not 0 <= x <= 1:
        raise UsageError(f"entropy argument {x} outside [0, 1]")
    if x in (0, 1):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def inverse_entropy(y: float, tol: float = BISECTION_TOL) -> float:
    """The x in [0, 1/2] with H(x) = y.

    H is flat near x = 1/2, so for y close to 1 the result is only resolved to about 1e-8.
    """
    if not 0 <= y <= 1:
        raise UsageError(f"inverse entropy argument {y} outside [0, 1]")
    if y == 0 or y == 1:
        return 0.5 * y
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _h_or_none(x: float) -> float | None:
    # outside [0, 1/2] the bound is no longer the decreasing branch it is meant to be
    return entropy(x) if 0 <= x <= 0.5 else None


@dataclass(frozen=True)
class RateWindow:
    n: int
    K: int
    d1: int
    d2: int
    upper: float | None
    lower: float | None

    @property
    def rate(self) -> float:
        return self.K / self.n

    @property
    def allowed(self) -> bool:
        """K/n does not exceed the Hamming-side limit."""
        return self.upper is not None and self.rate <= self.upper

    @property
    def guaranteed(self) -> bool:
        """K/n sits under the Gilbert-Varshamov side, so such codes exist."""
        return self.lower is not None and self.rate <= self.lower

    def to_dict(self) -> dict:
        return {**asdict(self), "rate": self.rate, "allowed": self.allowed, "guaranteed": self.guaranteed}


def rate_window(n: int, K: int, d1: int, d2: int) -> RateWindow:
    if n <= 0 or not 0 < d1 <= n or not 0 < d2 <= n or K < 0:
        raise UsageError("need n > 0, K >= 0 and 0 < d1, d2 <= n")
    hu1, hu2 = _h_or_none(d1 / (2 * n)), _h_or_none(d2 / (2 * n))
    hl1, hl2 = _h_or_none(d1 / n), _h_or_none(d2 / n)
    upper = None if hu1 is None or hu2 is None else 1 - hu1 - hu2
    lower = None if hl1 is None or hl2 is None else 1 - hl1 - hl2
    return RateWindow(n, K, d1, d2, upper, lower)


def distance_window(rate: float = 0.0) -> tuple[float, float]:
    """Range of d/n (with d1 = d2) between the two bounds at the given K/n."""
    if not 0 <= rate <= 1:
        raise UsageError("rate must lie in [0, 1]")
    h = inverse_entropy((1 - rate) / 2)
    return h, 2 * h


def threshold_summary() -> tuple[float, float]:
    """Defection probabilities below which recovery is assured, and above which it cannot work."""
    h = inverse_entropy(0.5)
    return h / 2, h


def emit_rate_curves(grid: Sequence[float]) -> list[tuple[float, float, float, float]]:
    """Rows ``(d/n, 1 - 2H(d/2n), 1 - 2H(d/n), 1 - H(d/2n))``."""
    rows = []
    for r in grid:
        if not 0 < r < 0.5:
            raise UsageError(f"grid value {r} outside (0, 1/2)")
        rows.append((r, 1 - 2 * entropy(r / 2), 1 - 2 * entropy(r), 1 - entropy(r / 2)))
    return rows


# -- survival ------------------------------------------------------------------------


def _log_binom_pmf(n: int, i: np.ndarray, p: float) -> np.ndarray:
    return (
        math.lgamma(n + 1)
        - np.array([math.lgamma(k + 1) + math.lgamma(n - k + 1) for k in i])
        + i * math.log(p)
        + (n - i) * math.log1p(-p)
    )


def _logsumexp(v: np.ndarray) -> float:
    if v.size == 0:
        return -math.inf
    m = float(np.max(v))
    return m + math.log(float(np.sum(np.exp(v - m))))


def binomial_cdf_parts(n: int, p: float, x: int) -> tuple[float, float]:
    """``(F, 1 - F)`` for ``F = P(Binomial(n, p) <= x)``, each summed directly.

    Summing the smaller side directly keeps tiny tails intact.
    """
    if x < 0:
        return 0.0, 1.0
    if x >= n or p == 0:
        return 1.0, 0.0
    if p == 1:
        return 0.0, 1.0
    low = _logsumexp(_log_binom_pmf(n, np.arange(0, x + 1), p))
    high = _logsumexp(_log_binom_pmf(n, np.arange(x + 1, n + 1), p))
    f, tail = math.exp(low), math.exp(high)
    # renormalize away the rounding of two independent sums
    s = f + tail
    return f / s, tail / s


def binomial_cdf_exact(n: int, p: Fraction | str | int, x: int) -> Fraction:
    """Rational binomial CDF, for cross-checking small instances."""
    p = Fraction(p)
    q = 1 - p
    return sum((Fraction(math.comb(n, i)) * p ** i * q ** (n - i) for i in range(0, min(x, n) + 1)), Fraction(0))


def erf_tail_asymptotic(z: float) -> float:
    """Leading terms of ``1 - erf(z)`` for large z."""
    if z <= 0:
        raise UsageError("asymptotic tail needs z > 0")
    return math.exp(-z * z) / (z * math.sqrt(math.pi)) * (1 - 1 / (2 * z * z))


@dataclass(frozen=True)
class SurvivalReport:
    n: int
    p: float
    d: int
    T: int
    x: int
    mu: float
    sigma: float
    F_exact: float
    tail_exact: float
    F_erf: float
    tail_erf: float
    tail_asymptotic: float | None
    P_exact: float
    P_erf: float

    def to_dict(self) -> dict:
        return asdict(self)


def _power_from_tail(tail: float, T: int) -> float:
    if tail >= 1:
        return 0.0
    return math.exp(T * math.log1p(-tail))


def survival(n: int, p: float, d: int, T: int = 1) -> SurvivalReport:
    """Chance that at most ``(d-1)//2`` of ``n`` qubits defect in a step, and in all ``T`` steps.

    The ``erf`` columns use ``F = erf((x - mu) / (sigma sqrt 2))``.
    """
    if not 0 <= p <= 1:
        raise UsageError(f"p = {p} outside [0, 1]")
    if not 1 <= d <= n:
        raise UsageError("need 1 <= d <= n")
    if T < 1:
        raise UsageError("T must be at least 1")
    x = (d - 1) // 2
    mu = n * p
    sigma = math.sqrt(n * p * (1 - p))
    f, tail = binomial_cdf_parts(n, p, x)
    if sigma == 0:
        tail_erf = 0.0 if x >= mu else 1.0
        asym = None
    else:
        z = (x - mu) / (sigma * math.sqrt(2))
        tail_erf = math.erfc(z)
        asym = erf_tail_asymptotic(z) if z > 0 else None
    f_erf = 1 - tail_erf
    return SurvivalReport(
        n=n, p=p, d=d, T=T, x=x, mu=mu, sigma=sigma,
        F_exact=f, tail_exact=tail,
        F_erf=f_erf, tail_erf=tail_erf, tail_asymptotic=asym,
        P_exact=_power_from_tail(tail, T),
        P_erf=_power_from_tail(tail_erf, T),
    )
