"""Asymptotic eigenvalue and gap formulas built purely from Fourier data.

Notation: for index ``n`` and a parity, the two resonant modes sit at
frequencies ``+-base`` with ``base = 2 pi n`` (periodic) or ``2 pi n + pi``
(antiperiodic); they are coupled by ``q_kappa`` with ``kappa = 2n`` or
``2n + 1``.

The iterated sums ``a_k``, ``b_k`` run over index tuples ``n_1..n_k`` whose
partial sums ``p_s = n_1 + ... + n_s`` avoid ``0`` and ``kappa``::

    a_k(lam) = sum q_{n_1} ... q_{n_k} q_{-p_k} / prod_s (lam - (base - 2 pi p_s)**2)
    b_k(lam) = sum q_{n_1} ... q_{n_k} q_{kappa - p_k} / prod_s (...)

They are evaluated as a transfer recursion over the partial sum, so order
``k`` costs ``O(k**2 K**2)`` rather than ``O(K**k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError, PhaseUndefined
from .galerkin import ANTIPERIODIC, PERIODIC, coupling_index, resonant_base
from .potential import DerivedCoeffTable, FourierTable

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SeriesParams:
    """Summation width ``K`` per index (None: table width) and denominator guard."""

    K: int | None = None
    guard: float = 1e-8

    def __post_init__(self):
        if self.K is not None and self.K < 1:
            raise ValueError("K must be >= 1")
        if self.guard <= 0:
            raise ValueError("guard must be positive")


@dataclass(frozen=True)
class AsymptoticEstimate:
    n: int
    j: int
    parity: str
    order: int
    value: float
    a_part: complex = 0j
    b_part: complex = 0j
    modulus: float = 0.0
    trace: tuple = field(default=(), repr=False)
    tail: float = 0.0


def _sign(j: int) -> int:
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    return -1 if j == 1 else 1


def _width(t: FourierTable, sp: SeriesParams) -> int:
    K = t.k_max if sp.K is None else sp.K
    if t.exact:
        K = min(K, t.finite_support)
    return K


def _tail_envelope(t: FourierTable, K: int) -> float:
    """Envelope constant ``C`` with ``|q_k| <~ C / k`` near ``k = K``."""
    if t.exact and t.finite_support <= K:
        return 0.0
    ks = np.arange(max(1, K // 2), K + 1)
    q = t.coefficients(K, strict=False)
    return float(np.max(np.abs(q[K + ks]) * ks))


def series_terms(t: FourierTable, n: int, lam: float, order: int,
                 sp: SeriesParams | None = None, parity: str = PERIODIC):
    """Arrays ``(a_1..a_order, b_1..b_order)`` at energy ``lam``."""
    sp = sp or SeriesParams()
    if order < 1:
        raise ValueError("order must be >= 1")
    K = _width(t, sp)
    kappa = coupling_index(n, parity)
    base = resonant_base(n, parity)
    scale = sp.guard * base * base
    a = np.zeros(order, dtype=complex)
    b = np.zeros(order, dtype=complex)
    if K == 0:
        return a, b
    q = t.coefficients(K)
    w = q.copy()
    lo = -K  # partial sum represented by w[0]
    for s in range(order):
        p = np.arange(lo, lo + w.size)
        denom = lam - (base - TWO_PI * p) ** 2
        keep = (p != 0) & (p != kappa)
        bad = keep & (np.abs(denom) < scale)
        if np.any(bad):
            raise GuardError(int(p[np.argmax(bad)]),
                             f"denominator below {sp.guard:g} * base**2 at lam={lam:.12g}")
        w = np.where(keep, w / np.where(keep, denom, 1.0), 0.0)
        # closing factors q_{-p} and q_{kappa - p}, zero outside |index| <= K
        close_a = np.abs(p) <= K
        a[s] = np.sum(w[close_a] * q[K - p[close_a]])
        close_b = np.abs(kappa - p) <= K
        b[s] = np.sum(w[close_b] * q[K + kappa - p[close_b]])
        if s + 1 < order:
            w = np.convolve(w, q)
            lo -= K
    return a, b


def a_term(t: FourierTable, k_order: int, n: int, lam: float,
           sp: SeriesParams | None = None, parity: str = PERIODIC) -> complex:
    return complex(series_terms(t, n, lam, k_order, sp, parity)[0][-1])


def b_term(t: FourierTable, k_order: int, n: int, lam: float,
           sp: SeriesParams | None = None, parity: str = PERIODIC) -> complex:
    return complex(series_terms(t, n, lam, k_order, sp, parity)[1][-1])


def a_partial(t: FourierTable, m: int, n: int, lam: float,
              sp: SeriesParams | None = None, parity: str = PERIODIC) -> complex:
    """``A_m(lam) = a_1 + ... + a_m``; ``A_0 = 0``."""
    if m == 0:
        return 0j
    return complex(np.sum(series_terms(t, n, lam, m, sp, parity)[0]))


def b_partial(t: FourierTable, m: int, n: int, lam: float,
              sp: SeriesParams | None = None, parity: str = PERIODIC) -> complex:
    """``B_m(lam) = b_1 + ... + b_m``; ``B_0 = 0``."""
    if m == 0:
        return 0j
    return complex(np.sum(series_terms(t, n, lam, m, sp, parity)[1]))


def a1_closed(t: FourierTable, n: int, parity: str = PERIODIC, K: int | None = None) -> float:
    """First-order shift ``a_1(base**2)`` with the ``+-k`` terms paired.

    ``(1/2 pi^2) sum_{k>=1, k != kappa} |q_k|^2 / ((kappa-k)(kappa+k))`` plus
    the unpaired ``k = -kappa`` term ``-|q_kappa|^2 / (8 pi^2 kappa^2)``, whose
    partner ``k = kappa`` is excluded from the series.
    """
    K = _width(t, SeriesParams(K))
    kappa = coupling_index(n, parity)
    ks = np.arange(1, K + 1)
    ks = ks[ks != kappa]
    q = t.coefficients(K)
    terms = np.abs(q[K + ks]) ** 2 / ((kappa - ks) * (kappa + ks))
    unpaired = abs(q[K + kappa]) ** 2 / (8.0 * math.pi ** 2 * kappa ** 2) if kappa <= K else 0.0
    return float(np.sum(terms) / (2.0 * math.pi ** 2) - unpaired)


def a1_tail(t: FourierTable, n: int, parity: str = PERIODIC, K: int | None = None) -> float:
    """Envelope estimate of the part of :func:`a1_closed` beyond ``K``."""
    K = _width(t, SeriesParams(K))
    C = _tail_envelope(t, K)
    if C == 0.0:
        return 0.0
    kappa = coupling_index(n, parity)
    ks = np.arange(K + 1, 64 * (K + 1))
    ks = ks[ks != kappa]
    return float(np.sum(C * C / (ks * ks * np.abs((kappa - ks) * (kappa + ks)))) / (2.0 * math.pi ** 2))


def gap_first_order(t: FourierTable, k: int) -> float:
    """``2 |q_k|`` (pass ``k = 2n`` for periodic, ``2n + 1`` for antiperiodic gaps)."""
    return 2.0 * abs(t[k])


def second_order_coupling(t: FourierTable, d: DerivedCoeffTable, k: int) -> complex:
    """``q_k - S_k + 2 Q_0 Q_k``."""
    return t[k] - d.Sk(k) + 2.0 * d.Q0 * d.Qk(k)


def gap_second_order(t: FourierTable, d: DerivedCoeffTable, k: int) -> float:
    return 2.0 * abs(second_order_coupling(t, d, k))


def eig_first_order(t: FourierTable, n: int, j: int, parity: str = PERIODIC) -> float:
    """``base**2 + (-1)**j |q_kappa|``."""
    return resonant_base(n, parity) ** 2 + _sign(j) * abs(t[coupling_index(n, parity)])


def eig_second_order(t: FourierTable, d: DerivedCoeffTable, n: int, j: int,
                     parity: str = PERIODIC, sp: SeriesParams | None = None) -> float:
    """``base**2 + A_2(base**2) + (-1)**j |q_kappa - S_kappa + 2 Q_0 Q_kappa|``."""
    base2 = resonant_base(n, parity) ** 2
    A2 = a_partial(t, 2, n, base2, sp, parity)
    return base2 + A2.real + _sign(j) * abs(second_order_coupling(t, d, coupling_index(n, parity)))


def e_recursion(t: FourierTable, n: int, j: int, m: int,
                sp: SeriesParams | None = None, parity: str = PERIODIC) -> AsymptoticEstimate:
    """Iterate ``E_k = base**2 + A_k(E_{k-1}) + (-1)**j |q_kappa + B_k(E_{k-1})|``.

    ``E_0 = base**2``. Both ``A_k`` and ``B_k`` are evaluated at the previous
    iterate. ``trace`` holds ``E_0 .. E_m``.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    sign = _sign(j)
    kappa = coupling_index(n, parity)
    qk = t[kappa]
    base2 = resonant_base(n, parity) ** 2
    E = base2
    trace = [E]
    A = B = 0j
    for k in range(1, m + 1):
        a, b = series_terms(t, n, E, k, sp, parity)
        A, B = complex(np.sum(a)), complex(np.sum(b))
        E = base2 + A.real + sign * abs(qk + B)
        trace.append(E)
    tail = 0.0 if m == 0 else a1_tail(t, n, parity, (sp or SeriesParams()).K)
    return AsymptoticEstimate(n, j, parity, m, float(E), A, B, abs(qk + B), tuple(trace), tail)


def gap_order_m(t: FourierTable, n: int, m: int, parity: str = PERIODIC,
                sp: SeriesParams | None = None) -> float:
    """``max(E_{n,2,m} - E_{n,1,m}, 0)`` for ``m >= 2``."""
    if m < 2:
        raise ValueError("use gap_first_order / gap_second_order for m < 2")
    upper = e_recursion(t, n, 2, m, sp, parity).value
    lower = e_recursion(t, n, 1, m, sp, parity).value
    return max(upper - lower, 0.0)


def condition_check(t: FourierTable, d: DerivedCoeffTable | None, n: int, eps: float, kind: str,
                    m: int = 2, sp: SeriesParams | None = None, parity: str = PERIODIC) -> bool:
    """Non-degeneracy tests that license the first, second and order-m formulas.

    ``"43"``: ``|q_kappa| >= eps / n``; ``"49"``: ``|q_kappa - S_kappa + 2 Q_0 Q_kappa| >= eps / n**2``;
    ``"52"``: ``|q_kappa + B_m(E_{n,j,m-1})| >= eps / n**m`` for both ``j``.
    """
    kappa = coupling_index(n, parity)
    kind = str(kind)
    if kind == "43":
        return abs(t[kappa]) >= eps / n
    if kind == "49":
        if d is None:
            raise ValueError("kind 49 needs derived coefficients")
        return abs(second_order_coupling(t, d, kappa)) >= eps / n ** 2
    if kind == "52":
        for j in (1, 2):
            prev = e_recursion(t, n, j, m - 1, sp, parity).value
            B = b_partial(t, m, n, prev, sp, parity)
            if abs(t[kappa] + B) < eps / n ** m:
                return False
        return True
    raise ValueError(f"unknown condition kind {kind!r}")


def eigenfunction_model(t: FourierTable, n: int, j: int, parity: str, x):
    """``sqrt(2) sin(theta x + alpha/2)`` (j=1) or ``sqrt(2) cos(...)`` (j=2).

    ``theta = base`` and ``alpha = arg q_kappa``.
    """
    kappa = coupling_index(n, parity)
    qk = t[kappa]
    if qk == 0:
        raise PhaseUndefined(f"q_{kappa} = 0, eigenfunction phase undefined")
    _sign(j)
    phase = resonant_base(n, parity) * np.asarray(x, dtype=float) + 0.5 * np.angle(qk)
    return math.sqrt(2.0) * (np.sin(phase) if j == 1 else np.cos(phase))


__all__ = [
    "ANTIPERIODIC", "PERIODIC", "AsymptoticEstimate", "SeriesParams",
    "a1_closed", "a1_tail", "a_partial", "a_term", "b_partial", "b_term",
    "condition_check", "e_recursion", "eig_first_order", "eig_second_order",
    "eigenfunction_model", "gap_first_order", "gap_order_m", "gap_second_order",
    "second_order_coupling", "series_terms",
]
