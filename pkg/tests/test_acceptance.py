"""Acceptance gate.

Each ``test_criterion_N_*`` records a ``detail`` string with the measured
numbers; conftest prints one PASS/FAIL line per criterion at the end of the run.
"""
import math
import time

import numpy as np
import pytest

from hillgaps import (ExperimentConfig, GalerkinConfig, SeriesParams, TrigPoly, antiderivative,
                      antiperiodic_pairs, derived_coeffs, e_recursion, emit_report, fit_decay_rate,
                      fourier_table, gap_first_order, gap_second_order, gap_table, kp_make, kp_potential,
                      periodic_pairs, run_gap_experiment)
from hillgaps.asymptotics import a1_closed, a_term, series_terms
from hillgaps.galerkin import build_operator_matrix, eigen_residuals, eigenvector_overlap, resonant_base

from conftest import CORPUS, oracle, quad_coeff

PI = math.pi
KP = kp_potential(kp_make(1.0, "1/2"))  # a = -1, b = 1


def test_criterion_1_free_operator_exact(record_property):
    start = time.perf_counter()
    worst, worst_gap = 0.0, 0.0
    for t, get in ((0.0, periodic_pairs), (PI, antiperiodic_pairs)):
        cfg = GalerkinConfig(t, 64)
        H = build_operator_matrix(fourier_table(TrigPoly({}), 128), cfg)
        got = np.linalg.eigvalsh(H)
        want = np.sort((2 * PI * np.arange(-64, 65) + t) ** 2)
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(want, 1.0))))
        tab = get(TrigPoly({}), 24, cfg)
        lam = np.sort(tab.eigenvalues)
        worst = max(worst, float(np.max(np.abs(lam - want) / np.maximum(want, 1.0))))
        worst_gap = max(worst_gap, max(g for _, g in gap_table(tab)))
    elapsed = time.perf_counter() - start
    record_property("detail", f"max rel err {worst:.1e}, max gap {worst_gap:.1e}, {elapsed:.2f}s")
    assert worst <= 1e-9
    assert worst_gap == 0.0
    assert elapsed < 5.0


def test_criterion_2_kp_antiperiodic_first_order(record_property):
    tab = antiperiodic_pairs(KP, 40, GalerkinConfig(PI, 128))
    ns = range(10, 41)
    ratio = {n: tab.pair(n).gap * PI * (2 * n + 1) / 4 for n in ns}
    trend = fit_decay_rate([(n, abs(ratio[n] - 1)) for n in ns]).slope
    record_property("detail", f"ratio(10)={ratio[10]:.5f} ratio(40)={ratio[40]:.5f} deviation slope {trend:.2f}")
    assert 0.97 <= ratio[40] <= 1.03
    assert trend < 0


def test_criterion_3_kp_periodic_constant(record_property):
    tab = periodic_pairs(KP, 30, GalerkinConfig(0.0, 128))
    scaled = {n: tab.pair(n).gap * (4 * PI * n) ** 2 for n in range(10, 31)}
    c30 = scaled[30]
    chosen = min((2, 4), key=lambda c: abs(c30 - c))
    record_property("detail", f"|gap|(4 pi n)^2 at n=30: {c30:.5f}; oracle selects {chosen}")
    assert abs(c30 - 4) <= 0.4
    assert chosen == 4


def test_criterion_4_first_order_rate(record_property):
    tab = antiperiodic_pairs(KP, 50, GalerkinConfig(PI, 128))
    t = fourier_table(KP, 128)
    pts = [(n, abs(tab.pair(n).gap - gap_first_order(t, 2 * n + 1))) for n in range(10, 51)]
    fit = fit_decay_rate(pts)
    record_property("detail", f"slope {fit.slope:.3f} (R^2 {fit.r2:.4f})")
    assert fit.slope <= -1.5


def test_criterion_5_second_order_rate(record_property):
    tab = periodic_pairs(KP, 50, GalerkinConfig(0.0, 128))
    t = fourier_table(KP, 128)
    d = derived_coeffs(t, 16384)
    pts = [(n, abs(tab.pair(n).gap - gap_second_order(t, d, 2 * n))) for n in range(10, 51)]
    fit = fit_decay_rate(pts)
    record_property("detail", f"slope {fit.slope:.3f} (R^2 {fit.r2:.4f}), S tail bound {d.tail_bound:.1e}")
    assert fit.slope <= -2.2


def test_criterion_6_mathieu_first_gap(record_property):
    gap = antiperiodic_pairs(TrigPoly.cosine(0.1), 4, GalerkinConfig(PI, 32)).pair(0).gap
    record_property("detail", f"|Omega_0| = {gap:.8f}")
    assert abs(gap - 0.2) <= 0.02


def test_criterion_7_recursion_improves(record_property):
    p = CORPUS["trig3"]
    tab = periodic_pairs(p, 40, GalerkinConfig(0.0, 2 * 40 + 32))
    t = fourier_table(p, p.degree)
    wins = total = 0
    for n in range(10, 41):
        for j in (1, 2):
            lam = tab.pair(n).value(j)
            tr = e_recursion(t, n, j, 2).trace
            wins += abs(lam - tr[2]) <= abs(lam - tr[1])
            total += 1
    record_property("detail", f"{wins}/{total} improved ({wins / total:.0%})")
    assert wins >= 0.9 * total


def _property_failures(name):
    """Run every corpus invariant on one potential; return the names of the ones that fail."""
    p = CORPUS[name]
    bad = []
    t = fourier_table(p, 512)
    ks = np.arange(1, 65)
    q = t.coefficients(64)
    if np.max(np.abs(q[64 - ks] - np.conj(q[64 + ks]))) > 1e-12:
        bad.append("conjugate symmetry")
    if abs(t[0]) > 1e-12:
        bad.append("q_0 = 0")
    t20 = fourier_table(p, 20)
    d = derived_coeffs(t20, 4096)
    for k in range(1, 21):
        if abs(quad_coeff(lambda x: antiderivative(p, x), p, k) - t20[k] / (2j * PI * k)) > 1e-8:
            bad.append(f"Q_{k} identity")
    for k in range(0, 21):
        if abs(d.Sk(k) - quad_coeff(lambda x: antiderivative(p, x) ** 2, p, k)) > max(1e-8, d.tail_bound):
            bad.append(f"S_{k} convolution")
    t128, sp = fourier_table(p, 128), SeriesParams(128)
    for parity in ("periodic", "antiperiodic"):
        for n in (3, 10, 25):
            a, _ = series_terms(t128, n, resonant_base(n, parity) ** 2, 3, sp, parity)
            if np.max(np.abs(a.imag)) > 1e-10:
                bad.append(f"Im a_k ({parity} n={n})")
        for n in (1, 4, 10, 40):
            lam = resonant_base(n, parity) ** 2
            if abs(a_term(t, 1, n, lam, parity=parity) - a1_closed(t, n, parity)) > 1e-12:
                bad.append(f"grouped form ({parity} n={n})")
    per, ap = oracle(name, "periodic"), oracle(name, "antiperiodic")
    for tab in (per, ap):
        if max(pr.residual for pr in tab.pairs) > 1e-8:
            bad.append(f"residual ({tab.parity})")
        H = build_operator_matrix(fourier_table(p, 2 * tab.M), GalerkinConfig(tab.t, tab.M))
        w, V = np.linalg.eigh(H)
        if np.max(eigen_residuals(H, w, V)) > 1e-8:
            bad.append(f"dense residual ({tab.parity})")
    edges = [per.ground]
    for n in range(0, 40):
        edges += [ap.pair(n).lower, ap.pair(n).upper, per.pair(n + 1).lower, per.pair(n + 1).upper]
    steps = np.diff(edges)
    if np.any(steps[0::2] <= 0) or np.any(steps[1::2] < -1e-9):
        bad.append("band ordering")
    ns = range(10, 41)
    for tab in (per, ap):
        weight = [abs(1 - abs(tab.pair(n).u_plus[0]) ** 2 - abs(tab.pair(n).u_minus[0]) ** 2) for n in ns]
        cross = [abs(2 * (tab.pair(n).u_plus[0] * np.conj(tab.pair(n).u_plus[1])).real) for n in ns]
        for label, vals in (("resonant weight", weight), ("cross product", cross)):
            vals = [v if v > 1e-13 else 0.0 for v in vals]
            if sum(v > 0 for v in vals) >= 4 and fit_decay_rate(zip(ns, vals)).slope > -1.5:
                bad.append(f"{label} decay ({tab.parity})")
    return bad


def test_criterion_8_property_suite(record_property):
    failures = {name: _property_failures(name) for name in sorted(CORPUS)}
    t = fourier_table(KP, 64)
    overlaps = [eigenvector_overlap(oracle("kp_half", "antiperiodic"), 20, j, t) for j in (1, 2)]
    if min(overlaps) < 0.99:
        failures.setdefault("kp_half", []).append("eigenvector overlap")
    n_bad = sum(len(v) for v in failures.values())
    summary = "; ".join(f"{k}: {', '.join(v)}" for k, v in failures.items() if v) or "all invariants hold"
    record_property("detail", f"{len(CORPUS)} potentials, overlap(20) {min(overlaps):.5f}, {summary}")
    assert n_bad == 0, summary


def test_criterion_9_harness(record_property):
    exps = (0.5, 1.0, 2.0, 3.7)
    recovered = [fit_decay_rate([(n, 2.5 * n ** -p) for n in range(5, 100)]).slope for p in exps]
    fit_err = max(abs(s + p) for s, p in zip(recovered, exps))

    cfg = ExperimentConfig("kronig_penney", params={"b": 1, "c": "1/2"}, parity="both",
                           n_min=1, n_max=60, M=256, m=2)
    start = time.perf_counter()
    rows = run_gap_experiment(cfg)
    elapsed = time.perf_counter() - start
    first = emit_report(rows, "csv")
    again = emit_report(run_gap_experiment(cfg), "csv")
    record_property("detail", f"fit err {fit_err:.1e}, {len(rows)} rows in {elapsed:.1f}s, "
                              f"bytes identical: {first == again}")
    assert fit_err <= 1e-6
    assert len(rows) == 120
    assert first == again
    assert elapsed < 60.0


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_report_bytes_stable_across_formats(fmt):
    cfg = ExperimentConfig("kronig_penney", n_max=12, m=3)
    assert emit_report(run_gap_experiment(cfg), fmt).encode() == emit_report(run_gap_experiment(cfg), fmt).encode()
