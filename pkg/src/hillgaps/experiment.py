"""Oracle-versus-estimator gap experiments, decay fits and report files."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .asymptotics import SeriesParams, gap_first_order, gap_order_m, gap_second_order
from .galerkin import (ANTIPERIODIC, PERIODIC, GalerkinConfig, antiperiodic_pairs,
                       coupling_index, default_M, periodic_pairs)
from .kronig_penney import kp_make, kp_potential
from .potential import Potential, TrigPoly, derived_coeffs, fourier_table, potential_from_dict, support_degree

PARITIES = (PERIODIC, ANTIPERIODIC)
CSV_COLUMNS = ("n", "parity", "lambda1", "lambda2", "gap_oracle", "gap_o1", "gap_o2",
               "gap_om", "err_o1", "err_o2", "err_om", "trunc_err")


def random_trig(degree: int = 3, seed: int = 0, scale: float = 1.0) -> TrigPoly:
    """Real trig polynomial with standard-normal complex coefficients for ``1 <= k <= degree``."""
    rng = np.random.default_rng(seed)
    re, im = rng.standard_normal((2, degree))
    return TrigPoly({k + 1: scale * complex(re[k], im[k]) for k in range(degree)})


def preset_potential(name: str, params: Mapping | None = None) -> Potential:
    params = dict(params or {})
    if name == "free":
        return TrigPoly({})
    if name == "mathieu":
        return TrigPoly.cosine(float(params.get("a", 0.1)))
    if name == "kronig_penney":
        return kp_potential(kp_make(float(params.get("b", 1.0)), params.get("c", "1/2")))
    if name in ("random_trig", "random"):
        return random_trig(int(params.get("degree", 3)), int(params.get("seed", 0)),
                           float(params.get("scale", 1.0)))
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("free", "mathieu", "kronig_penney", "random_trig")


@dataclass(frozen=True)
class ExperimentConfig:
    """One gap experiment.

    ``potential`` is either a preset name (with ``params``) or a potential
    mapping as accepted by :func:`potential_from_dict`. ``orders`` lists the
    closed-form orders (1 and/or 2); ``m`` adds the order-m recursion.
    """

    potential: str | Mapping = "free"
    params: Mapping = field(default_factory=dict)
    parity: str = "both"
    n_min: int = 1
    n_max: int = 10
    M: int | None = None
    orders: tuple = (1, 2)
    m: int | None = None
    sp: SeriesParams = field(default_factory=SeriesParams)
    format: str = "csv"
    output: str | None = None

    def __post_init__(self):
        if self.parity not in PARITIES + ("both",):
            raise ValueError(f"parity must be periodic, antiperiodic or both, got {self.parity!r}")
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError("need 1 <= n_min <= n_max")
        if self.M is not None and self.M < default_M(self.n_max):
            raise ValueError(f"M={self.M} below 2*n_max+16={default_M(self.n_max)}")
        if not set(self.orders) <= {1, 2}:
            raise ValueError("orders must be a subset of {1, 2}")
        if self.m is not None and self.m < 2:
            raise ValueError("m must be >= 2")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        object.__setattr__(self, "orders", tuple(sorted(set(self.orders))))

    @property
    def truncation(self) -> int:
        return self.M if self.M is not None else default_M(self.n_max)

    @property
    def parities(self) -> tuple:
        return PARITIES if self.parity == "both" else (self.parity,)

    def build_potential(self) -> Potential:
        if isinstance(self.potential, str):
            return preset_potential(self.potential, self.params)
        return potential_from_dict(self.potential)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - {f.name for f in fields(cls)} - {"K", "guard", "preset"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "preset" in data:
            data["potential"] = data.pop("preset")
        sp = data.pop("sp", {}) or {}
        for key in ("K", "guard"):
            if key in data:
                sp[key] = data.pop(key)
        if "orders" in data:
            data["orders"] = tuple(data["orders"])
        return cls(sp=SeriesParams(**sp), **data)


@dataclass(frozen=True)
class GapReportRow:
    n: int
    parity: str
    lambda1: float
    lambda2: float
    gap_oracle: float
    gap_o1: float | None = None
    gap_o2: float | None = None
    gap_om: float | None = None
    err_o1: float | None = None
    err_o2: float | None = None
    err_om: float | None = None
    trunc_err: float = 0.0


def _threads(n_jobs: int) -> int:
    cap = os.environ.get("HILLGAPS_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_jobs))


def _err(gap: float, est: float | None) -> float | None:
    return None if est is None else abs(gap - est)


def run_gap_experiment(cfg: ExperimentConfig) -> list[GapReportRow]:
    """Rows ordered by parity (periodic first) then ``n``."""
    p = cfg.build_potential()
    M = cfg.truncation
    deg = support_degree(p)
    width = max(M, 2 * cfg.n_max + 1)
    if cfg.sp.K is not None:
        width = max(width, cfg.sp.K)
    table = fourier_table(p, width if deg is None else max(1, min(width, deg)))
    derived = derived_coeffs(table) if 2 in cfg.orders else None
    rows: list[GapReportRow] = []
    for parity in cfg.parities:
        if parity == PERIODIC:
            oracle = periodic_pairs(p, cfg.n_max, GalerkinConfig(0.0, M))
        else:
            oracle = antiperiodic_pairs(p, cfg.n_max, GalerkinConfig(math.pi, M))

        def row(n: int, parity=parity, oracle=oracle) -> GapReportRow:
            pr = oracle.pair(n)
            gap = abs(pr.gap)
            k = coupling_index(n, parity)
            o1 = gap_first_order(table, k) if 1 in cfg.orders else None
            o2 = gap_second_order(table, derived, k) if 2 in cfg.orders else None
            om = gap_order_m(table, n, cfg.m, parity, cfg.sp) if cfg.m else None
            return GapReportRow(n, parity, pr.lower, pr.upper, gap, o1, o2, om,
                                _err(gap, o1), _err(gap, o2), _err(gap, om), pr.trunc_err)

        ns = range(cfg.n_min, cfg.n_max + 1)
        workers = _threads(len(ns))
        if workers == 1:
            rows.extend(map(row, ns))
        else:
            with ThreadPoolExecutor(workers) as pool:
                rows.extend(pool.map(row, ns))
    return rows


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line through ``(ln n, ln e_n)``; unpacks as ``(slope, intercept, r2)``."""

    slope: float
    intercept: float
    r2: float
    used: int
    dropped: int

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r2))


def fit_decay_rate(points: Iterable[tuple[float, float]]) -> DecayFit:
    pts = [(float(n), float(e)) for n, e in points]
    kept = [(n, e) for n, e in pts if e > 0.0 and math.isfinite(e)]
    if len(kept) < 4:
        raise ValueError(f"need at least 4 positive points, got {len(kept)}")
    x = np.log([n for n, _ in kept])
    y = np.log([e for _, e in kept])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(intercept), r2, len(kept), len(pts) - len(kept))


def _cell(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def render_report(rows: Sequence[GapReportRow], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([_cell(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([asdict(r) for r in rows], indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(rows: Sequence[GapReportRow], fmt: str = "csv", path: str | os.PathLike | None = None) -> str:
    """Render ``rows`` and write them to ``path`` (UTF-8) when given; returns the text."""
    text = render_report(rows, fmt)
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text


def _parse_cell(name: str, raw: str):
    if name == "parity":
        return raw
    if name == "n":
        return int(raw)
    return None if raw == "" else float(raw)


def load_report(text: str, fmt: str = "csv") -> list[GapReportRow]:
    if fmt == "json":
        return [GapReportRow(**d) for d in json.loads(text)]
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError("unexpected CSV header")
    return [GapReportRow(**{k: _parse_cell(k, v) for k, v in rec.items()}) for rec in reader]
