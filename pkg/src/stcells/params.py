"""Slack constants and exact arithmetic for thresholds of the form N**e."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from .geometry import fmt, q


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class SlackParams:
    """Every tunable constant used by thresholds across the pipeline.

    Thresholds are written as N**(a + c*epsilon); k, k1, k2 are the integer
    multipliers of epsilon that appear in the refinement and fast/slow tests.
    """

    epsilon: Fraction = Fraction(1, 20)
    C_gap: Fraction = Fraction(4)
    k: int = 10
    k1: int = 2
    k2: int = 2
    c_cross: Fraction = Fraction(1, 64)
    C_st: Fraction = Fraction(5, 2)

    def __post_init__(self):
        for name in ("epsilon", "C_gap", "c_cross", "C_st"):
            object.__setattr__(self, name, q(getattr(self, name)))
        if not (0 < self.epsilon <= Fraction(1, 10)):
            raise InvalidParams("epsilon must lie in (0, 1/10]")
        for name in ("C_gap", "c_cross", "C_st"):
            if getattr(self, name) <= 0:
                raise InvalidParams(f"{name} must be positive")
        for name in ("k", "k1", "k2"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise InvalidParams(f"{name} must be a positive integer")

    def exp(self, a, c=0) -> Fraction:
        """The exponent a + c*epsilon."""
        return q(a) + c * self.epsilon

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = fmt(v) if isinstance(v, Fraction) else v
        return out

    @classmethod
    def from_json(cls, d: dict) -> "SlackParams":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidParams(f"unknown parameters: {sorted(extra)}")
        kw = {}
        for k, v in d.items():
            kw[k] = int(v) if k in ("k", "k1", "k2") else q(v if not isinstance(v, float) else str(v))
        return cls(**kw)

    def replace(self, **kw) -> "SlackParams":
        d = asdict(self)
        d.update(kw)
        return SlackParams(**d)


DESCRIPTIONS = {
    "epsilon": "slack exponent; thresholds take the form N^(a + c*epsilon), 0 < epsilon <= 1/10",
    "C_gap": "window constant: gap events involve ceil(C_gap * N * ln N / r) consecutive lines",
    "k": "multiplier of epsilon in the per-cell incidence cap N^(k*epsilon) and cell complexity cap",
    "k1": "multiplier of epsilon in the per-sector cell and crossing caps",
    "k2": "multiplier of epsilon separating slow lines from fast ones",
    "c_cross": "constant of the crossing lower bound e^3 / v^2",
    "C_st": "constant of the point-line incidence bound (n*m)^(2/3) + n + m",
}


def _split(e) -> tuple[int, int]:
    e = q(e)
    return e.numerator, e.denominator


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2 or k == 1:
        return n
    x = int(round(n ** (1.0 / k))) if n.bit_length() < 1000 else 1 << (n.bit_length() // k + 1)
    x = max(x, 1)
    # Newton from above, then fix up
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _cmp_power(x, N: int, e) -> int:
    """Sign of x - N**e for x >= 0, N >= 1."""
    x = q(x)
    if x < 0:
        return -1
    p, d = _split(e)
    lhs = x ** d
    rhs = Fraction(N) ** p
    return (lhs > rhs) - (lhs < rhs)


def at_least(x, N: int, e) -> bool:
    return _cmp_power(x, N, e) >= 0


def exceeds(x, N: int, e) -> bool:
    return _cmp_power(x, N, e) > 0


def below(x, N: int, e) -> bool:
    return _cmp_power(x, N, e) < 0


def at_most(x, N: int, e) -> bool:
    return _cmp_power(x, N, e) <= 0


def power_floor(N: int, e) -> int:
    """floor(N ** e) exactly."""
    p, d = _split(e)
    if N <= 1:
        return N
    if p < 0:
        return 0
    return iroot(N ** p, d)


def power_ceil(N: int, e) -> int:
    f = power_floor(N, e)
    if _cmp_power(f, N, e) == 0:
        return f
    return f + 1


def power_approx(N: int, e, bits: int = 40) -> Fraction:
    """A rational within 2**-bits (relative) of N ** e, never above it."""
    p, d = _split(e)
    if N == 0:
        return Fraction(0) if p > 0 else Fraction(1)
    if p >= 0:
        scale = 1 << bits
        return Fraction(iroot(N ** p * scale ** d, d), scale)
    # N ** e = 1 / N ** (-e); use the upper bracket of the denominator
    scale = 1 << bits
    up = iroot(N ** (-p) * scale ** d, d) + 1
    return Fraction(scale, up)


def ln_window(C, N: int, r: int) -> int:
    """ceil(C * N * ln N / r): the number of consecutive lines in a gap event."""
    if r <= 0:
        raise ValueError("r must be positive")
    return max(1, math.ceil(float(q(C)) * N * math.log(N) / r)) if N > 1 else 1


def epsilon_bracket(x, N: int, base, eps) -> int | None:
    """The integer j with N**(base + j*eps) <= x < N**(base + (j+1)*eps), or None for x == 0."""
    x = q(x)
    if x <= 0:
        return None
    base, eps = q(base), q(eps)
    j = math.floor((math.log(x) / math.log(N) - float(base)) / float(eps)) if N > 1 else 0
    # correct any floating error with exact comparisons
    while not at_least(x, N, base + j * eps):
        j -= 1
    while at_least(x, N, base + (j + 1) * eps):
        j += 1
    return j
