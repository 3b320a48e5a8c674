import numpy as np
import pytest

from framewalk import (AdaptiveSettings, ElasticCoefficients,
                       NonconvergenceError, SolverSettings, SpectralGrid,
                       adaptive_dt, assemble_A_mid, cayley_update,
                       continuous_variation, grdg_step, initial_profile,
                       jfnk_solve, reduce_coefficients, run_simulation,
                       total_energy)
from framewalk.frames import FrameField, random_frame
from framewalk.integrator import (StepState, make_rate_residual,
                                  rate_preconditioner, skew)

from conftest import random_reduced

DEGENERATE = ElasticCoefficients((1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0))
ALL_ONES = ElasticCoefficients((1.0,) * 12)


def property_grid(n=16):
    return SpectralGrid((n, n, 1), (2, 2, 2), (-1, -1, -1))


# -- skew and Cayley -------------------------------------------------------

def test_skew_layout_and_properties(rng):
    omega = rng.normal(size=(4, 3))
    A = skew(omega)
    assert np.abs(A + np.swapaxes(A, -1, -2)).max() == 0.0
    assert A[0, 0, 1] == omega[0, 2] and A[0, 1, 2] == omega[0, 0] \
        and A[0, 2, 0] == omega[0, 1]
    assert np.abs(skew(np.zeros((2, 3)))).max() == 0.0


def test_cayley_zero_rate_is_identity(grid8, rng):
    p = random_frame(grid8, rng)
    p2 = cayley_update(p, np.zeros(grid8.counts + (3,)), 0.7)
    assert np.array_equal(p2.data, p.data)


def test_cayley_quarter_turn():
    g = SpectralGrid((2, 2, 1), (1, 1, 1))
    p = FrameField.identity(g)
    omega = np.zeros(g.counts + (3,))
    omega[..., 2] = 1.0
    p2 = cayley_update(p, omega, 2.0)
    expected = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.abs(p2.data - expected).max() <= 1e-15


def test_cayley_matches_direct_solve(grid8, rng):
    p = random_frame(grid8, rng)
    omega = rng.normal(size=grid8.counts + (3,))
    tau = 0.83
    p2 = cayley_update(p, omega, tau)
    A = skew(tau * omega)
    eye = np.broadcast_to(np.eye(3), A.shape)
    direct = p.data @ np.matmul(eye + 0.5 * A, np.linalg.inv(eye - 0.5 * A))
    assert np.abs(p2.data - direct).max() <= 1e-13


def test_cayley_preserves_so3(grid8, rng):
    p = random_frame(grid8, rng)
    for tau in (1e-3, 0.1, 3.0):
        omega = rng.normal(size=grid8.counts + (3,)) * 5.0
        p2 = cayley_update(p, omega, tau)
        assert p2.orthonormality_error() <= 1e-13
        assert p2.det_error() <= 1e-12


def test_cayley_rejects_negative_tau(grid8, rng):
    p = random_frame(grid8, rng)
    with pytest.raises(ValueError):
        cayley_update(p, np.zeros(grid8.counts + (3,)), -0.1)


# -- rate assembly ----------------------------------------------------------

def test_assemble_homogeneous_is_zero(rng):
    g = property_grid(8)
    p = FrameField.identity(g)
    omega = assemble_A_mid(p, p, random_reduced(rng), (2.0, 2.0, 2.0))
    assert np.abs(omega).max() == 0.0


def test_assemble_skewness(rng):
    g = property_grid(8)
    a, b = random_frame(g, rng), random_frame(g, rng)
    omega = assemble_A_mid(a, b, random_reduced(rng), (2.0, 2.0, 2.0))
    A = skew(omega)
    assert np.abs(A + np.swapaxes(A, -1, -2)).max() == 0.0


def test_assemble_equal_states_matches_continuous_operators(grid16, rng):
    # oracle: the rotation derivatives written out explicitly from the
    # continuous variational derivative, paired per the defining formulas
    p = random_frame(grid16, rng, max_mode=2)
    rc = random_reduced(rng, low=0.1, high=3.0)
    chi = (2.0, 3.0, 4.0)
    dF = continuous_variation(p, rc)
    n = [p.column(j) for j in range(3)]
    d = [dF[..., :, j] for j in range(3)]
    dot = lambda u, v: (u * v).sum(axis=-1)
    L1 = dot(n[2], d[1]) - dot(n[1], d[2])
    L2 = dot(n[0], d[2]) - dot(n[2], d[0])
    L3 = dot(n[1], d[0]) - dot(n[0], d[1])
    omega = assemble_A_mid(p, p, rc, chi)
    scale = 1.0 + max(np.abs(L1).max(), np.abs(L2).max(), np.abs(L3).max())
    assert np.abs(omega[..., 0] - L1 / chi[0]).max() <= 1e-12 * scale
    assert np.abs(omega[..., 1] - L2 / chi[1]).max() <= 1e-12 * scale
    assert np.abs(omega[..., 2] - L3 / chi[2]).max() <= 1e-12 * scale


# -- JFNK -------------------------------------------------------------------

def test_jfnk_linear_single_step(rng):
    # tolerance above the finite-difference floor, where one Newton step
    # solves a linear residual outright
    b = rng.normal(size=50)
    x, info = jfnk_solve(lambda x: x - b, np.zeros(50),
                         SolverSettings(newton_tol=1e-6))
    assert np.abs(x - b).max() <= 1e-6
    assert info["newton_iters"] == 1


def test_jfnk_quadratic_known_root():
    def residual(x):
        return np.array([x[0] ** 2 - 4.0, x[1] ** 2 - 9.0])

    x, info = jfnk_solve(residual, np.array([1.0, 1.0]),
                         SolverSettings(newton_tol=1e-13))
    assert np.abs(x - np.array([2.0, 3.0])).max() <= 1e-12
    assert info["residual_evals"] > info["newton_iters"]


def test_jfnk_converged_guess_costs_one_eval():
    x, info = jfnk_solve(lambda x: x, np.zeros(10), SolverSettings())
    assert info["residual_evals"] == 1 and info["newton_iters"] == 0


def test_jfnk_nonconvergence_carries_best_iterate():
    # R(x) = x^2 + 1 has no real root
    def residual(x):
        return x * x + 1.0

    with pytest.raises(NonconvergenceError) as err:
        jfnk_solve(residual, np.array([0.5]), SolverSettings(max_newton=5))
    assert err.value.best_x is not None
    assert np.isfinite(err.value.best_norm)


# -- the implicit step ------------------------------------------------------

def test_rate_residual_zero_at_equilibrium():
    g = property_grid(8)
    p = FrameField.identity(g)
    rc = reduce_coefficients(DEGENERATE)
    residual = make_rate_residual(p, 1e-2, rc, DEGENERATE.chi)
    assert np.abs(residual(np.zeros(g.counts + (3,)).ravel())).max() == 0.0


def test_rate_residual_root_reconstructs_scheme(rng):
    g = property_grid(12)
    p_old = initial_profile("meridian_swirl", g)
    rc = reduce_coefficients(ALL_ONES)
    chi = ALL_ONES.chi
    tau = 5e-3
    settings = SolverSettings()
    residual = make_rate_residual(p_old, tau, rc, chi)
    omega_flat, info = jfnk_solve(residual, np.zeros(g.counts + (3,)).ravel(),
                                  settings)
    omega = omega_flat.reshape(g.counts + (3,))
    p_new = cayley_update(p_old, omega, tau)
    # substitute back: (p+ - p)/tau = p_mid A_mid must hold at solver accuracy
    A = skew(assemble_A_mid(p_old, p_new, rc, chi))
    mid = 0.5 * (p_old.data + p_new.data)
    lhs = (p_new.data - p_old.data) / tau
    rhs = np.matmul(mid, A)
    assert np.abs(lhs - rhs).max() <= 100 * settings.newton_tol


def test_grdg_step_equilibrium_fixed_point(rng):
    g = property_grid(8)
    p = FrameField.identity(g)
    rc = reduce_coefficients(DEGENERATE)
    state = StepState.initial(p, rc, tau=1e-2)
    grdg_step(state, rc, DEGENERATE.chi, SolverSettings())
    assert np.array_equal(state.p.data, p.data)
    assert state.energy.total == 0.0
    assert state.history[0].residual_evals == 1


def test_grdg_step_large_step_dissipates(rng):
    # unconditional stability probe: one rough step at tau = 0.1
    g = property_grid(16)
    p0 = initial_profile("meridian_swirl", g)
    rc = reduce_coefficients(ALL_ONES)
    state = StepState.initial(p0, rc, tau=0.1)
    f0 = state.energy.total
    grdg_step(state, rc, ALL_ONES.chi, SolverSettings())
    rec = state.history[0]
    assert rec.energy <= f0 + 1e-10 * (1.0 + abs(f0))
    assert rec.orthonormality_error <= 1e-12
    assert abs(rec.dissipation_defect) <= 1e-8 * (1.0 + abs(f0))


def test_grdg_step_retries_at_half_tau(monkeypatch):
    g = property_grid(8)
    p0 = initial_profile("meridian_swirl", g)
    rc = reduce_coefficients(DEGENERATE)
    state = StepState.initial(p0, rc, tau=2e-3)
    calls = []
    import framewalk.integrator as mod
    real = mod.jfnk_solve

    def flaky(residual, guess, settings, M=None):
        calls.append(1)
        if len(calls) == 1:
            raise NonconvergenceError("synthetic failure")
        return real(residual, guess, settings, M=M)

    monkeypatch.setattr(mod, "jfnk_solve", flaky)
    grdg_step(state, rc, DEGENERATE.chi, SolverSettings())
    assert len(calls) == 2
    assert state.history[0].tau == pytest.approx(1e-3)


def test_property_run_solver_cost():
    # warm-started steps stay under 20 residual evaluations; only the
    # zero-guess first step at tau_max is allowed a cold-start allowance
    g = property_grid(16)
    p0 = initial_profile("meridian_swirl", g)
    result = run_simulation(p0, DEGENERATE, 0.02, adaptive=AdaptiveSettings())
    evals = [r.residual_evals for r in result.history]
    assert max(evals[1:]) <= 20
    assert evals[0] <= 30


def test_gonzalez_gradient_step(rng):
    g = property_grid(12)
    p0 = initial_profile("meridian_swirl", g)
    rc = reduce_coefficients(DEGENERATE)
    state = StepState.initial(p0, rc, tau=1e-3)
    f0 = state.energy.total
    grdg_step(state, rc, DEGENERATE.chi, SolverSettings(), gradient="gonzalez")
    rec = state.history[0]
    assert rec.energy < f0
    assert abs(rec.dissipation_defect) <= 1e-7 * (1.0 + abs(f0))
    assert rec.orthonormality_error <= 1e-12


def test_preconditioned_solve_agrees(rng):
    g = property_grid(12)
    p0 = initial_profile("meridian_swirl", g)
    rc = reduce_coefficients(ALL_ONES)
    chi = ALL_ONES.chi
    s_plain = StepState.initial(p0, rc, tau=2e-3)
    s_pre = StepState.initial(p0.copy(), rc, tau=2e-3)
    grdg_step(s_plain, rc, chi, SolverSettings())
    grdg_step(s_pre, rc, chi, SolverSettings(precondition=True))
    assert np.abs(s_plain.p.data - s_pre.p.data).max() <= 1e-6
    assert rate_preconditioner(g, rc, chi, 2e-3) is not None


# -- adaptivity --------------------------------------------------------------

def test_adaptive_flat_energy_gives_tau_max():
    a = AdaptiveSettings(tau_max=2e-3, tau_min=1e-5, alpha=1e-3)
    assert adaptive_dt(1.0, 1.0, 1e-3, a) == 2e-3


def test_adaptive_clamps_at_tau_min():
    a = AdaptiveSettings(tau_max=2e-3, tau_min=1e-5, alpha=1e-3)
    assert adaptive_dt(0.0, 1e12, 1e-3, a) == 1e-5


def test_adaptive_midrange_value():
    a = AdaptiveSettings(tau_max=2e-3, tau_min=1e-5, alpha=1e-3)
    got = adaptive_dt(0.0, 1.0, 1e-3, a)  # |dF/tau| = 1e3
    assert got == pytest.approx(2e-3 / np.sqrt(1001.0), rel=1e-12)


def test_adaptive_validation():
    with pytest.raises(ValueError):
        AdaptiveSettings(tau_max=1e-5, tau_min=2e-3)
    a = AdaptiveSettings()
    with pytest.raises(ValueError):
        adaptive_dt(1.0, 1.0, 0.0, a)


# -- run driver ---------------------------------------------------------------

def test_run_homogeneous_fixed_tau_is_stationary():
    g = property_grid(8)
    p0 = FrameField.identity(g)
    result = run_simulation(p0, DEGENERATE, 0.01, tau=2e-3)
    assert len(result.history) == 5
    assert all(rec.energy == 0.0 for rec in result.history)
    assert np.array_equal(result.state.p.data, p0.data)
    assert result.monotone


def test_run_short_degenerate_decay():
    g = property_grid(16)
    p0 = initial_profile("meridian_swirl", g)
    result = run_simulation(p0, DEGENERATE, 0.3,
                            adaptive=AdaptiveSettings())
    h = result.history
    f0 = total_energy(p0, reduce_coefficients(DEGENERATE)).total
    assert result.monotone
    assert h[-1].energy < 0.05 * f0
    assert h[-1].t == pytest.approx(0.3)
    assert max(r.orthonormality_error for r in h) <= 1e-12


def test_run_argument_validation():
    g = property_grid(8)
    p0 = FrameField.identity(g)
    with pytest.raises(ValueError, match="exactly one"):
        run_simulation(p0, DEGENERATE, 1.0)
    with pytest.raises(ValueError, match="exactly one"):
        run_simulation(p0, DEGENERATE, 1.0, tau=1e-3,
                       adaptive=AdaptiveSettings())
    with pytest.raises(ValueError, match="t_end"):
        run_simulation(p0, DEGENERATE, -1.0, tau=1e-3)


def test_run_snapshot_cadence():
    g = property_grid(8)
    p0 = initial_profile("meridian_swirl", g)
    result = run_simulation(p0, DEGENERATE, 0.01, tau=2e-3, snapshot_every=2)
    steps = [s for s, _, _ in result.snapshots]
    assert steps[0] == 0 and steps[-1] == 5
    assert 2 in steps and 4 in steps
