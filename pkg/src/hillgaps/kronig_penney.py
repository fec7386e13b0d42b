"""Closed forms for the two-valued step (Kronig-Penney) potential.

``q = a`` on ``[0, c]`` and ``q = b`` on ``(c, 1]`` with ``a < 0 < b`` and
``a c + (1 - c) b = 0``. With ``c = p/m`` in lowest terms the gap next to
index ``k`` decays like ``1/k**2`` when ``m`` divides ``k`` and like ``1/k``
otherwise.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .potential import PiecewiseConstant

TWO_PI = 2.0 * math.pi

Rational = Union[Fraction, float, str]


@dataclass(frozen=True)
class KPParams:
    a: float
    b: float
    c: Union[Fraction, float]

    def __post_init__(self):
        c = float(self.c)
        if not 0.0 < c < 1.0:
            raise ValueError(f"c={self.c} must lie in (0, 1)")
        if not self.a < 0.0 < self.b:
            raise ValueError("need a < 0 < b")
        if abs(self.a * c + (1.0 - c) * self.b) > 1e-12 * max(1.0, abs(self.a), self.b):
            raise ValueError("a*c + (1-c)*b must vanish")

    @property
    def exact_c(self) -> bool:
        return isinstance(self.c, Fraction)


def parse_rational(c: Rational) -> Union[Fraction, float]:
    """Accept ``Fraction``, ``"p/q"`` strings, or floats (kept inexact)."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, str):
        if "/" in c:
            return Fraction(c.strip())
        return float(c)
    if isinstance(c, int):
        return Fraction(c)
    return float(c)


def kp_make(b: float, c: Rational) -> KPParams:
    """Parameters with ``a`` chosen so the potential has zero mean."""
    c = parse_rational(c)
    cf = float(c)
    if not 0.0 < cf < 1.0:
        raise ValueError(f"c={c} must lie in (0, 1)")
    if b <= 0:
        raise ValueError("b must be positive")
    if isinstance(c, Fraction):
        a = float(-Fraction(b) * (1 - c) / c)
    else:
        a = -b * (1.0 - cf) / cf
    return KPParams(a, float(b), c)


def kp_potential(params: KPParams) -> PiecewiseConstant:
    return PiecewiseConstant((0.0, float(params.c)), (params.a, params.b))


def _phase(params: KPParams, k: int) -> complex:
    """``exp(-2 pi i k c)``, exact on the unit circle for rational ``c``."""
    if isinstance(params.c, Fraction):
        frac = (k * params.c) % 1
        if frac == 0:
            return 1.0 + 0j
        return cmath.exp(-1j * TWO_PI * float(frac))
    return cmath.exp(-1j * TWO_PI * k * float(params.c))


def kp_qk(params: KPParams, k: int) -> complex:
    """``q_k = (a - b) / (2 pi k i) * (1 - exp(-2 pi i k c))``."""
    if k == 0:
        raise ValueError("q_0 vanishes by the mean-zero constraint")
    return (params.a - params.b) / (TWO_PI * k * 1j) * (1.0 - _phase(params, k))


def kp_derived(params: KPParams, k: int) -> tuple[float, complex, complex]:
    """``(Q_0, Q_k, leading term of S_k)``.

    ``Q_0 = b (c - 1) / 2``, ``Q_k = (a - b)/(2 pi k)**2 * (exp(-2 pi i k c) - 1)``
    and ``S_k ~ -2 a b exp(-2 pi i k c) / (2 pi k)**2`` up to ``O(k**-3)``.
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    e = _phase(params, k)
    denom = (TWO_PI * k) ** 2
    Q0 = 0.5 * params.b * (float(params.c) - 1.0)
    Qk = (params.a - params.b) / denom * (e - 1.0)
    Sk = -2.0 * params.a * params.b * e / denom
    return Q0, Qk, Sk


def kp_gap_leading(params: KPParams, k: int) -> float:
    """``2 |q_k - S_k + 2 Q_0 Q_k|`` built from the closed forms."""
    Q0, Qk, Sk = kp_derived(params, k)
    return 2.0 * abs(kp_qk(params, k) - Sk + 2.0 * Q0 * Qk)


def kp_rate_classify(params: KPParams, k: int) -> str:
    """``"quadratic"`` if the reduced denominator of ``c`` divides ``k``, else ``"linear"``."""
    if not isinstance(params.c, Fraction):
        raise ValueError("rate classification needs c as an exact rational")
    return "quadratic" if k % params.c.denominator == 0 else "linear"
