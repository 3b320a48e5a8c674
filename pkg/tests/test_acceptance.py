"""Acceptance suite: every criterion at its stated tolerance.

One test per criterion, each ending with an always-visible pass/fail line.
The 10-time-unit property run is computed once and shared by the criteria
that read its history.  Criterion 8 is split: the energy-decay clause and
the step-size plateau clause are asserted separately, because the plateau
fraction is sensitive to the transient step count (see the notes shipped
with the run summary below).
"""

import time

import numpy as np
import pytest

from framewalk import (AdaptiveSettings, ElasticCoefficients,
                       FrankTensorCoefficients, SolverSettings, SpectralGrid,
                       energy_original_form, frank_tensor_energy,
                       initial_profile, kijkl_to_frank, oseen_frank_energy,
                       reduce_coefficients, run_simulation, total_energy)
from framewalk.dgrad import energy_difference_defect
from framewalk.frames import random_frame
from framewalk.manufactured import spatial_sweep, temporal_sweep

DEGENERATE_K = (1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0)
ANISOTROPIC_K = (0.05, 0.45, 3.75, 0.15, 0.35, 1.75,
                 5.55, 2.25, 3.955, 0.255, 1.955, 1.55)
ADAPTIVE = dict(tau_max=2e-3, tau_min=1e-5, alpha=1e-3)


def report(number, ok, detail):
    # shown in the -rA summary for passed tests, inline for failures
    print(f"[{'PASS' if ok else 'FAIL'}] acceptance criterion {number}: "
          f"{detail}", flush=True)


def box32():
    return SpectralGrid((32, 32, 1), (2.0, 2.0, 2.0), (-1.0, -1.0, -1.0))


@pytest.fixture(scope="module")
def degenerate_run():
    """Shared 10-time-unit degenerate-coefficient run at N=32."""
    g = box32()
    p0 = initial_profile("meridian_swirl", g)
    coeffs = ElasticCoefficients(DEGENERATE_K)
    f0 = total_energy(p0, reduce_coefficients(coeffs)).total
    start = time.perf_counter()
    result = run_simulation(p0, coeffs, 10.0, solver=SolverSettings(),
                            adaptive=AdaptiveSettings(**ADAPTIVE))
    elapsed = time.perf_counter() - start
    print(f"(degenerate run: {len(result.history)} steps in {elapsed:.0f}s)",
          flush=True)
    return f0, result


@pytest.mark.slow
def test_criterion_01_temporal_order():
    start = time.perf_counter()
    res = temporal_sweep(n=24, taus=(0.1, 0.05, 0.025, 0.0125, 0.00625),
                         t_end=0.2)
    elapsed = time.perf_counter() - start
    ok = bool(np.all(res.orders >= 1.8) and np.all(res.orders <= 2.2)) \
        and elapsed <= 600
    report(1, ok, f"temporal orders {np.round(res.orders, 3)} in [1.8, 2.2], "
                  f"{elapsed:.0f}s")
    assert np.all(res.orders >= 1.8) and np.all(res.orders <= 2.2)
    assert elapsed <= 600


@pytest.mark.slow
def test_criterion_02_spatial_spectral_decay():
    start = time.perf_counter()
    res = spatial_sweep(tau=1e-3, ns=(6, 10, 14, 18, 22), t_end=0.2)
    elapsed = time.perf_counter() - start
    errs = res.errors.max(axis=1)
    plateau = 1e-6
    above = errs > plateau
    decreasing = all(errs[i + 1] < errs[i]
                     for i in range(len(errs) - 1) if above[i + 1])
    reached = errs.min() <= plateau
    ratio = errs[3] / errs[1]
    ok = decreasing and reached and ratio <= 1e-2 and elapsed <= 900
    report(2, ok, f"errors {np.format_float_scientific(errs[0], 2)}.."
                  f"{np.format_float_scientific(errs[-1], 2)}, "
                  f"err(18)/err(10)={ratio:.2e}, {elapsed:.0f}s")
    assert decreasing and reached
    assert ratio <= 1e-2
    assert elapsed <= 900


def test_criterion_03_energy_difference_relation():
    g = SpectralGrid((8, 8, 8), (2 * np.pi,) * 3)
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        p_old = random_frame(g, rng)
        p_new = random_frame(g, rng)
        rc = reduce_coefficients(
            ElasticCoefficients(tuple(rng.uniform(0, 5, size=12))))
        df = total_energy(p_new, rc).total - total_energy(p_old, rc).total
        defect = abs(energy_difference_defect(p_old, p_new, rc))
        worst = max(worst, defect / (1.0 + abs(df)))
    ok = worst <= 1e-10
    report(3, ok, f"100 random pairs, worst scaled defect {worst:.2e} <= 1e-10")
    assert worst <= 1e-10


@pytest.mark.slow
def test_criterion_04_discrete_dissipation_identity(degenerate_run):
    _, result = degenerate_run
    h = result.history
    worst = max(abs(r.dissipation_defect) / (1.0 + abs(r.energy)) for r in h)
    ok = len(h) >= 500 and worst <= 1e-8
    report(4, ok, f"{len(h)} steps, worst scaled identity residual "
                  f"{worst:.2e} <= 1e-8")
    assert len(h) >= 500
    assert worst <= 1e-8
    # history invariants: clock strictly increasing, steps within bounds
    # (the final step may be clipped below tau_min to land on t_end)
    ts = np.array([r.t for r in h])
    taus = np.array([r.tau for r in h])
    assert np.all(np.diff(ts) > 0)
    assert taus[:-1].min() >= ADAPTIVE["tau_min"] - 1e-15
    assert taus.max() <= ADAPTIVE["tau_max"] + 1e-15


@pytest.mark.slow
def test_criterion_05_unconditional_stability():
    g = box32()
    p0 = initial_profile("meridian_swirl", g)
    coeffs = ElasticCoefficients((1.0,) * 12)
    start = time.perf_counter()
    all_ok = True
    details = []
    for tau in (1e-3, 1e-2, 1e-1):
        result = run_simulation(p0, coeffs, 100 * tau, tau=tau,
                                solver=SolverSettings())
        all_ok &= result.monotone and len(result.history) == 100
        details.append(f"tau={tau:g}: monotone={result.monotone}")
    elapsed = time.perf_counter() - start
    ok = all_ok and elapsed <= 300
    report(5, ok, "; ".join(details) + f", {elapsed:.0f}s")
    assert all_ok
    assert elapsed <= 300


@pytest.mark.slow
def test_criterion_06_so3_preservation(degenerate_run):
    _, result = degenerate_run
    worst = max(r.orthonormality_error for r in result.history)
    ok = worst <= 1e-6
    report(6, ok, f"max orthonormality error {worst:.2e} <= 1e-6 "
                  f"(rate-parameterized solve holds {worst:.2e} <= 1e-12)")
    assert worst <= 1e-6
    # the rate-parameterized formulation is strictly better than required,
    # and the determinant never drifts from +1
    assert worst <= 1e-12
    assert result.state.p.det_error() <= 1e-12


def test_criterion_07_oseen_frank_reduction():
    g = SpectralGrid((8, 8, 8), (2 * np.pi,) * 3)
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(50):
        p = random_frame(g, rng)
        k1, k4, k7 = rng.uniform(0.05, 5.0, size=3)
        rc = reduce_coefficients(
            ElasticCoefficients((k1, 0, 0, k4, 0, 0, k7, 0, 0, k7, 0, 0)))
        f_bi = total_energy(p, rc).total
        f_of = oseen_frank_energy(p.column(0), k1, k4, k7, g)
        worst = max(worst, abs(f_bi - f_of) / (1.0 + abs(f_of)))
    ok = worst <= 1e-12
    report(7, ok, f"50 random fields, worst relative gap {worst:.2e} <= 1e-12")
    assert worst <= 1e-12


@pytest.mark.slow
def test_criterion_08_degenerate_equilibrium(degenerate_run, tmp_path):
    f0, result = degenerate_run
    final = result.history[-1].energy
    ok = final <= 1e-3 * f0
    report(8, ok, f"final F = {final:.2e} <= 1e-3 * F(0) = {1e-3 * f0:.2e}")
    assert final <= 1e-3 * f0
    assert result.monotone
    # the exported history shows tau at tau_max for the majority of rows
    from framewalk.output import read_history_csv, write_history_csv
    path = tmp_path / "history.csv"
    write_history_csv(result.history, path)
    rows = read_history_csv(path)
    majority = np.mean([r.tau >= 0.999 * ADAPTIVE["tau_max"] for r in rows])
    assert majority > 0.5


@pytest.mark.slow
def test_criterion_08b_step_size_plateau_fraction(degenerate_run):
    # Stated criterion: tau equals tau_max on >= 80% of steps.  The adaptive
    # controller spends about sqrt(alpha) * F(0) / tau_max steps below
    # tau_max while the energy drops, independently of how fast it drops;
    # with F(0) = 189.3 that is ~3000 transient steps against ~4900 plateau
    # steps, bounding the fraction near 62% for this configuration.  The
    # assertion is kept at the stated threshold; the run summary records the
    # achieved value.
    _, result = degenerate_run
    taus = np.array([r.tau for r in result.history])
    fraction = float((taus >= 0.999 * ADAPTIVE["tau_max"]).mean())
    ok = fraction >= 0.8
    report("8b", ok, f"tau = tau_max on {100 * fraction:.1f}% of steps "
                     f"(stated threshold 80%)")
    assert fraction >= 0.8, (
        f"tau_max fraction {fraction:.3f} < 0.8: the stated threshold is "
        f"unattainable for these parameters; see notes above and the "
        f"decisions ledger")


@pytest.mark.slow
def test_criterion_09_solver_cost(degenerate_run):
    _, result = degenerate_run
    evals = np.array([r.residual_evals for r in result.history])
    med = float(np.median(evals))
    ok = med <= 20
    report(9, ok, f"median residual evaluations per step {med:.0f} <= 20 "
                  f"(max {evals.max()}, cold-start first step "
                  f"{evals[0]})")
    assert med <= 20


def test_criterion_10_tensor_form_consistency():
    g = SpectralGrid((32, 32, 32), (2 * np.pi,) * 3)
    rng = np.random.default_rng(104)
    import warnings
    worst = 0.0
    for _ in range(3):
        p = random_frame(g, rng, max_mode=2, amplitude=0.4)
        KT = FrankTensorCoefficients(tuple(rng.uniform(0, 2, 3)),
                                     tuple(rng.uniform(0, 2, 6)),
                                     tuple(rng.uniform(-1, 1, 3)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            K = kijkl_to_frank(KT).K
        f_tensor = frank_tensor_energy(p, KT)
        f_conv = energy_original_form(p, K)
        worst = max(worst, abs(f_tensor - f_conv) / (1.0 + abs(f_conv)))
    ok = worst <= 1e-11
    report(10, ok, f"tensor-form vs converted density integrals agree to "
                   f"{worst:.2e} <= 1e-11")
    assert worst <= 1e-11


@pytest.mark.slow
def test_anisotropic_coefficients_qualitative():
    # the anisotropic set is asserted only for monotone dissipation, SO(3)
    # preservation and successful completion; the stage structure itself is
    # qualitative
    g = box32()
    p0 = initial_profile("meridian_swirl", g)
    coeffs = ElasticCoefficients(ANISOTROPIC_K)
    result = run_simulation(p0, coeffs, 10.0, solver=SolverSettings(),
                            adaptive=AdaptiveSettings(**ADAPTIVE))
    h = result.history
    worst_orth = max(r.orthonormality_error for r in h)
    ok = result.monotone and worst_orth <= 1e-12 and h[-1].t >= 10.0 - 1e-9
    report("anisotropic", ok, f"anisotropic run: {len(h)} steps, monotone="
                      f"{result.monotone}, orthonormality {worst_orth:.2e}")
    assert result.monotone
    assert worst_orth <= 1e-12
    assert h[-1].t == pytest.approx(10.0)


@pytest.mark.slow
def test_all_ones_two_stage_relaxation():
    # with equal constants the energy shows two distinct rapid-decay
    # episodes separated by a long plateau before reaching zero
    g = box32()
    p0 = initial_profile("meridian_swirl", g)
    coeffs = ElasticCoefficients((1.0,) * 12)
    result = run_simulation(p0, coeffs, 10.0, solver=SolverSettings(),
                            adaptive=AdaptiveSettings(**ADAPTIVE))
    h = result.history
    ts = np.array([r.t for r in h])
    fs = np.array([r.energy for r in h])
    f0 = total_energy(p0, reduce_coefficients(coeffs)).total

    def f_at(t):
        return fs[min(np.searchsorted(ts, t), len(fs) - 1)]

    # first episode: a large fraction of the energy gone quickly
    first_drop = f_at(0.5) <= 0.7 * f0
    # plateau: little relative change over a long stretch
    plateau = abs(f_at(3.0) - f_at(1.0)) <= 0.05 * f0 and f_at(1.0) > 1e-3 * f0
    # second episode: near-zero afterwards
    second_drop = f_at(10.0) <= 1e-3 * f0
    ok = result.monotone and first_drop and plateau and second_drop
    report("two-stage", ok,
           f"F0={f0:.1f}, F(0.5)={f_at(0.5):.3g}, F(1)={f_at(1.0):.3g}, "
           f"F(3)={f_at(3.0):.3g}, F(10)={f_at(10.0):.3g}")
    assert result.monotone and first_drop and plateau and second_drop
