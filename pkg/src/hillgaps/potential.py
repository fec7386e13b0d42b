"""1-periodic real potentials and their Fourier data.

Three representations are supported:

* :class:`TrigPoly` -- finitely many Fourier coefficients ``c_k``.
* :class:`PiecewiseConstant` -- step function given by breakpoints in ``[0, 1)``.
* :class:`Sampled` -- uniform samples, read as their trigonometric interpolant.

The Fourier convention throughout is ``q_k = int_0^1 q(x) exp(-2 pi i k x) dx``.
:class:`FourierTable` holds ``q_k`` for ``|k| <= k_max``; :class:`DerivedCoeffTable`
holds the coefficients of the antiderivative ``Q(x) = int_0^x q`` and of its
square ``S = Q**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import InsufficientResolution

TWO_PI = 2.0 * math.pi
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class TrigPoly:
    """Real trigonometric polynomial ``q(x) = sum_k c_k exp(2 pi i k x)``.

    Missing negative frequencies are filled in as ``conj(c_k)``; frequencies
    given on both sides must already be conjugate symmetric.
    """

    coeffs: Mapping[int, complex]

    def __post_init__(self):
        full = {}
        for k, c in self.coeffs.items():
            full[int(k)] = complex(c)
        for k in list(full):
            if -k not in full:
                full[-k] = full[k].conjugate()
        for k, c in full.items():
            if abs(full[-k] - c.conjugate()) > SYMMETRY_TOL * max(1.0, abs(c)):
                raise ValueError(f"coefficients at k=+-{abs(k)} are not conjugate; potential is not real")
        full = {k: c for k, c in full.items() if c != 0}
        if 0 in full:
            full[0] = complex(full[0].real)
        object.__setattr__(self, "coeffs", dict(sorted(full.items())))

    @classmethod
    def cosine(cls, amplitude: float, k: int = 1) -> "TrigPoly":
        """``2 * amplitude * cos(2 pi k x)``."""
        return cls({k: amplitude, -k: amplitude})

    @property
    def degree(self) -> int:
        return max((abs(k) for k in self.coeffs), default=0)


@dataclass(frozen=True)
class PiecewiseConstant:
    """Step potential: ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``.

    The last piece wraps through ``x = 1`` back to ``breakpoints[0]``.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bp = tuple(float(b) % 1.0 for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(bp) == 0 or len(bp) != len(vals):
            raise ValueError("need one value per breakpoint and at least one piece")
        if any(b1 >= b2 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly ascending in [0, 1)")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    def pieces(self):
        """Yield ``(start, end, value)`` with ``0 <= start < end <= 1``, unwrapped."""
        bp = self.breakpoints
        for i, v in enumerate(self.values):
            a = bp[i]
            b = bp[i + 1] if i + 1 < len(bp) else bp[0] + 1.0
            if b <= 1.0:
                yield a, b, v
            else:
                yield a, 1.0, v
                if b - 1.0 > 0.0:
                    yield 0.0, b - 1.0, v


@dataclass(frozen=True)
class Sampled:
    """Uniform samples ``q(j / N)``, ``j = 0..N-1``.

    The potential is the trigonometric interpolant of the samples restricted to
    ``|k| < N/2``; for even ``N`` the Nyquist mode is discarded.
    """

    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float).copy()
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("samples must be a 1-d array with at least two points")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def size(self) -> int:
        return int(self.samples.size)

    @property
    def nyquist(self) -> int:
        """Largest frequency kept by the interpolant."""
        return (self.size - 1) // 2


Potential = Union[TrigPoly, PiecewiseConstant, Sampled]


def support_degree(p: Potential) -> int | None:
    """Half-width of the Fourier support when it is finite, else ``None``."""
    if isinstance(p, TrigPoly):
        return p.degree
    if isinstance(p, Sampled):
        return p.nyquist
    return None


def mean_value(p: Potential) -> float:
    if isinstance(p, TrigPoly):
        return p.coeffs.get(0, 0j).real
    if isinstance(p, PiecewiseConstant):
        return math.fsum((b - a) * v for a, b, v in p.pieces())
    return float(np.mean(p.samples))


def normalize_mean_zero(p: Potential) -> tuple[Potential, float]:
    """Return ``(p - mean, mean)``.

    Eigenvalues of ``-y'' + p y`` equal those of the normalized operator plus
    the returned shift.
    """
    shift = mean_value(p)
    if shift == 0.0:
        return p, 0.0
    if isinstance(p, TrigPoly):
        return TrigPoly({k: c for k, c in p.coeffs.items() if k != 0}), shift
    if isinstance(p, PiecewiseConstant):
        return PiecewiseConstant(p.breakpoints, tuple(v - shift for v in p.values)), shift
    return Sampled(p.samples - shift), shift


def fourier_coeffs(p: Potential, ks) -> np.ndarray:
    """Vectorised ``q_k`` for an integer array ``ks``.

    Exact for TrigPoly and PiecewiseConstant. For Sampled the periodic
    trapezoidal rule is used; it is exact for frequencies below Nyquist of a
    band-limited signal and otherwise carries the aliasing error
    ``sum_{l != 0} |q_{k + l N}|``. Frequencies at or beyond Nyquist return 0.
    """
    ks = np.asarray(ks, dtype=np.int64)
    out = np.zeros(ks.shape, dtype=complex)
    if isinstance(p, TrigPoly):
        for k, c in p.coeffs.items():
            out[ks == k] = c
        return out
    if isinstance(p, PiecewiseConstant):
        nz = ks != 0
        k = ks[nz].astype(float)
        acc = np.zeros(k.shape, dtype=complex)
        for a, b, v in p.pieces():
            acc += v * (np.exp(-1j * TWO_PI * k * a) - np.exp(-1j * TWO_PI * k * b))
        out[nz] = acc / (1j * TWO_PI * k)
        out[~nz] = mean_value(p)
        return out
    n = p.size
    spectrum = np.fft.fft(p.samples) / n
    inside = np.abs(ks) <= p.nyquist
    out[inside] = spectrum[ks[inside] % n]
    return out


def fourier_coeff(p: Potential, k: int) -> complex:
    """``int_0^1 q(x) exp(-2 pi i k x) dx``."""
    return complex(fourier_coeffs(p, [k])[0])


def evaluate(p: Potential, x) -> np.ndarray:
    """Point values ``q(x)`` (x taken mod 1)."""
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    if isinstance(p, TrigPoly):
        val = np.zeros(x.shape, dtype=complex)
        for k, c in p.coeffs.items():
            val += c * np.exp(1j * TWO_PI * k * x)
        return val.real
    if isinstance(p, PiecewiseConstant):
        idx = np.searchsorted(np.asarray(p.breakpoints), x, side="right") - 1
        return np.asarray(p.values)[idx % len(p.values)]
    ks = np.arange(-p.nyquist, p.nyquist + 1)
    c = fourier_coeffs(p, ks)
    return (np.exp(1j * TWO_PI * np.multiply.outer(x, ks)) @ c).real


def antiderivative(p: Potential, x) -> np.ndarray:
    """``Q(x) = int_0^x q(t) dt`` for a mean-zero potential, x in ``[0, 1]``."""
    x = np.asarray(x, dtype=float)
    if isinstance(p, PiecewiseConstant):
        total = np.zeros(x.shape)
        for a, b, v in p.pieces():
            total += v * (np.clip(x, a, b) - a)
        return total
    if isinstance(p, Sampled):
        p = TrigPoly({int(k): c for k, c in zip(range(-p.nyquist, p.nyquist + 1),
                                                 fourier_coeffs(p, np.arange(-p.nyquist, p.nyquist + 1)))})
    val = np.zeros(x.shape, dtype=complex)
    for k, c in p.coeffs.items():
        if k != 0:
            val += c * (np.exp(1j * TWO_PI * k * x) - 1.0) / (1j * TWO_PI * k)
    return val.real


def antiderivative_mean(p: Potential) -> float:
    """Closed-form ``Q_0 = int_0^1 Q(x) dx = -int_0^1 x q(x) dx`` (mean-zero q)."""
    if isinstance(p, PiecewiseConstant):
        return -math.fsum(v * (b * b - a * a) / 2.0 for a, b, v in p.pieces())
    deg = support_degree(p)
    ks = np.arange(1, deg + 1)
    q = fourier_coeffs(p, ks)
    # k and -k terms pair into 2 Re(q_k / (2 pi i k))
    return float(-2.0 * np.sum((q / (1j * TWO_PI * ks)).real))


@dataclass(frozen=True)
class FourierTable:
    """Two-sided coefficients ``q_k`` for ``|k| <= k_max``, with ``q_0 = 0``.

    ``finite_support`` is the true support half-width when known (entries
    beyond it are exactly zero); ``source`` lets the table be widened on demand.
    ``shift`` is the mean that was removed when the table was built.
    """

    k_max: int
    values: np.ndarray = field(repr=False)
    finite_support: int | None = None
    source: Potential | None = field(default=None, repr=False, compare=False)
    shift: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).copy()
        if vals.shape != (2 * self.k_max + 1,):
            raise ValueError("values must have length 2*k_max+1")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, k: int) -> complex:
        if abs(k) <= self.k_max:
            return complex(self.values[k + self.k_max])
        if self.finite_support is not None and self.finite_support <= self.k_max:
            return 0j
        if self.source is not None:
            return fourier_coeff(self.source, k)
        raise InsufficientResolution(f"|k|={abs(k)} exceeds table half-width {self.k_max}")

    @property
    def exact(self) -> bool:
        """True when the table holds the complete Fourier support."""
        return self.finite_support is not None and self.finite_support <= self.k_max

    def can_extend(self, width: int) -> bool:
        return width <= self.k_max or self.exact or self.source is not None

    def coefficients(self, width: int, strict: bool = True) -> np.ndarray:
        """``q_k`` for ``|k| <= width`` as an array indexed by ``k + width``.

        Entries beyond the table come from the finite support (zeros) or the
        source potential. Without either, ``strict`` raises and otherwise pads
        with zeros.
        """
        if width <= self.k_max:
            lo = self.k_max - width
            return np.array(self.values[lo:lo + 2 * width + 1])
        if self.exact or (self.source is None and not strict):
            out = np.zeros(2 * width + 1, dtype=complex)
            out[width - self.k_max:width + self.k_max + 1] = self.values
            return out
        if self.source is None:
            raise InsufficientResolution(
                f"table half-width {self.k_max} < required {width} and the potential is not finitely supported")
        out = fourier_coeffs(self.source, np.arange(-width, width + 1))
        out[width] = 0.0
        return out

    def extended(self, width: int) -> "FourierTable":
        if width <= self.k_max:
            return self
        return FourierTable(width, self.coefficients(width), self.finite_support, self.source, self.shift)

    def l1_mass(self) -> float:
        return float(np.sum(np.abs(self.values)))


def fourier_table(p: Potential, k_max: int) -> FourierTable:
    """Tabulate ``q_k`` for ``|k| <= k_max``.

    The mean is removed (``q_0 = 0``) and recorded in ``shift``; negative
    frequencies are filled by conjugation so the table is exactly symmetric.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if isinstance(p, Sampled) and k_max > p.nyquist:
        raise InsufficientResolution(
            f"k_max={k_max} exceeds the Nyquist limit {p.nyquist} of a {p.size}-point grid")
    shift = mean_value(p)
    base, _ = normalize_mean_zero(p)
    pos = fourier_coeffs(base, np.arange(1, k_max + 1))
    values = np.concatenate([np.conj(pos[::-1]), [0j], pos])
    return FourierTable(k_max, values, support_degree(p), base, shift)


@dataclass(frozen=True)
class DerivedCoeffTable:
    """Coefficients of ``Q(x) = int_0^x q`` and ``S = Q**2`` for ``|k| <= k_max``.

    ``Q`` and ``S`` arrays are indexed by ``k + k_max`` and include ``k = 0``.
    ``tail_bound`` estimates the convolution truncation error of ``S_k``.
    """

    k_max: int
    Q0: float
    Q: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    k_conv: int = 0
    tail_bound: float = 0.0
    q0_exact: bool = True
    complete: bool = False

    def _at(self, arr: np.ndarray, k: int) -> complex:
        if abs(k) <= self.k_max:
            return complex(arr[k + self.k_max])
        if self.complete:
            return 0j
        raise InsufficientResolution(f"|k|={abs(k)} exceeds derived table half-width {self.k_max}")

    def Qk(self, k: int) -> complex:
        return self._at(self.Q, k)

    def Sk(self, k: int) -> complex:
        return self._at(self.S, k)


def _tail_envelope(q: np.ndarray, width: int, start: int) -> float:
    """``sum_{|m| > start} |Q_m|`` from a ``C/|m|`` envelope of ``|q_m|``."""
    ks = np.arange(max(1, start // 2), start + 1)
    env = float(np.max(np.abs(q[width + ks]) * ks)) if ks.size else 0.0
    # sum_{|m|>K} C / (2 pi m^2) ~ C / (pi K)
    return env / (math.pi * start)


def derived_coeffs(t: FourierTable, k_conv: int | None = None) -> DerivedCoeffTable:
    """Compute ``Q_0``, ``Q_k = q_k / (2 pi i k)`` and ``S_k = sum_m Q_m Q_{k-m}``.

    The convolution runs over ``|m| <= k_conv`` (default ``8 * k_max``) and
    needs ``Q`` out to ``k_conv + k_max``, which is pulled from the table's
    source potential when the table itself is narrower. ``Q_0`` is the exact
    mean of ``Q`` when the source has a closed form; for bare tables it falls
    back to ``-sum_{0<|k|<=k_conv} Q_k``. For finitely supported tables the
    output covers the whole support ``2d`` of ``S``.
    """
    kc = 8 * t.k_max if k_conv is None else int(k_conv)
    if kc < t.k_max:
        raise ValueError("k_conv must be >= k_max")
    K = max(t.k_max, 2 * t.finite_support) if t.exact else t.k_max
    wide = kc + K
    q = t.coefficients(wide, strict=False)
    ks = np.arange(-wide, wide + 1)
    Q = np.zeros_like(q)
    nz = ks != 0
    Q[nz] = q[nz] / (1j * TWO_PI * ks[nz])

    if t.source is not None:
        Q0 = antiderivative_mean(t.source)
        q0_exact = True
    else:
        inner = slice(wide - kc, wide + kc + 1)
        Q0 = float(-np.sum(Q[inner]).real)
        q0_exact = t.exact and t.finite_support <= kc
    Q[wide] = Q0

    Qa = Q[wide - kc:wide + kc + 1]
    full = np.convolve(Qa, Q)
    ks_out = np.arange(-K, K + 1)
    S = full[ks_out + 2 * kc + K]

    if t.exact and t.finite_support <= kc:
        tail = 0.0
    else:
        tail_sum = _tail_envelope(q, wide, kc)
        max_Q = abs(Q0) + float(np.sum(np.abs(Q))) + tail_sum
        tail = tail_sum * max_Q
    return DerivedCoeffTable(K, float(Q0), Q[wide - K:wide + K + 1].copy(), S, kc, tail, q0_exact,
                            complete=t.exact and t.finite_support <= kc)


def q0_series(t: FourierTable, k_conv: int) -> float:
    """Partial series ``-sum_{0<|k|<=k_conv} q_k / (2 pi i k)`` for ``Q_0``."""
    q = t.coefficients(k_conv, strict=False)
    ks = np.arange(1, k_conv + 1)
    return float(-2.0 * np.sum((q[k_conv + ks] / (1j * TWO_PI * ks)).real))


def potential_from_dict(data: Mapping) -> Potential:
    """Build a potential from its JSON description.

    ``{"kind": "trig_poly", "coefficients": {"1": [re, im] | re, ...}}``,
    ``{"kind": "piecewise", "breakpoints": [...], "values": [...]}``,
    ``{"kind": "sampled", "samples": [...]}`` or
    ``{"kind": "kronig_penney", "b": .., "c_num": .., "c_den": .., "a": ..?}``.
    """
    kind = data.get("kind")
    if kind == "trig_poly":
        coeffs = {}
        for k, c in data.get("coefficients", {}).items():
            coeffs[int(k)] = complex(*c) if isinstance(c, Sequence) and not isinstance(c, str) else complex(c)
        return TrigPoly(coeffs)
    if kind == "piecewise":
        return PiecewiseConstant(tuple(data["breakpoints"]), tuple(data["values"]))
    if kind == "sampled":
        return Sampled(np.asarray(data["samples"], dtype=float))
    if kind == "kronig_penney":
        from fractions import Fraction

        from .kronig_penney import kp_make, kp_potential

        c = Fraction(int(data["c_num"]), int(data["c_den"]))
        params = kp_make(float(data["b"]), c)
        if "a" in data and abs(float(data["a"]) - params.a) > 1e-12 * max(1.0, abs(params.a)):
            raise ValueError(f"a={data['a']} violates the mean-zero constraint (expected {params.a})")
        return kp_potential(params)
    raise ValueError(f"unknown potential kind {kind!r}")


def potential_to_dict(p: Potential) -> dict:
    if isinstance(p, TrigPoly):
        return {"kind": "trig_poly",
                "coefficients": {str(k): [c.real, c.imag] for k, c in p.coeffs.items()}}
    if isinstance(p, PiecewiseConstant):
        return {"kind": "piecewise", "breakpoints": list(p.breakpoints), "values": list(p.values)}
    return {"kind": "sampled", "samples": p.samples.tolist()}
