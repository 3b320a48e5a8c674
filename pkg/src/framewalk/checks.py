"""Fast property suite behind the `verify` CLI subcommand.

Each check returns (ok, detail).  The suite covers the structural
identities the scheme's guarantees rest on, at small grid sizes so the
whole table runs in well under a minute; the full-scale reproductions live
in the test suite's acceptance module.
"""

from __future__ import annotations

import numpy as np

from .dgrad import (biaxial_discrete_gradient, energy_difference_defect,
                    gonzalez_discrete_gradient)
from .elastic import (ElasticCoefficients, FrankTensorCoefficients,
                      continuous_variation, energy_original_form,
                      kijkl_to_frank, oseen_frank_energy, reduce_coefficients,
                      total_energy)
from .frames import initial_profile, random_frame
from .grid import SpectralGrid
from .integrator import (AdaptiveSettings, SolverSettings, adaptive_dt,
                         cayley_update, run_simulation)


def _grid8():
    return SpectralGrid((8, 8, 8), (2 * np.pi,) * 3)


def check_integration_by_parts():
    g = _grid8()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        f = rng.normal(size=g.counts)
        h = rng.normal(size=g.counts)
        for axis in range(3):
            val = g.integrate(f * g.partial(h, axis)) \
                + g.integrate(h * g.partial(f, axis))
            worst = max(worst, abs(val))
    return worst <= 1e-11, f"worst |int(f dg) + int(g df)| = {worst:.2e}"


def check_div_curl_identities():
    g = _grid8()
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(10):
        v = rng.normal(size=g.counts + (3,))
        worst = max(worst, np.abs(g.divergence(g.curl(v))).max())
        f = rng.normal(size=g.counts)
        worst = max(worst, np.abs(g.curl(g.gradient(f))).max())
    return worst <= 1e-10, f"worst |div curl| and |curl grad| = {worst:.2e}"


def check_euler_frames():
    g = SpectralGrid((6, 6, 6), (2 * np.pi,) * 3)
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(50):
        p = random_frame(g, rng)
        worst = max(worst, p.orthonormality_error(), p.det_error())
    return worst <= 1e-13, f"worst SO(3) error over 50 random fields = {worst:.2e}"


def check_coefficient_reduction():
    K = (0.05, 0.45, 3.75, 0.15, 0.35, 1.75,
         5.55, 2.25, 3.955, 0.255, 1.955, 1.55)
    rc = reduce_coefficients(ElasticCoefficients(K))
    ok = np.allclose(rc.gamma, (0.05, 0.35, 1.55), atol=1e-15) \
        and np.allclose(rc.reconstruct(), K, atol=1e-15) \
        and rc.k.min() >= 0 and rc.kk.min() >= 0
    return ok, f"gamma = {tuple(rc.gamma)}"


def check_energy_form_equivalence():
    g = _grid8()
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(5):
        p = random_frame(g, rng)
        K = tuple(rng.uniform(0, 5, size=12))
        rc = reduce_coefficients(ElasticCoefficients(K))
        f_red = total_energy(p, rc).total
        f_orig = energy_original_form(p, K)
        worst = max(worst, abs(f_red - f_orig) / (1.0 + abs(f_orig)))
    return worst <= 1e-12, f"worst relative form mismatch = {worst:.2e}"


def check_oseen_frank_reduction():
    g = _grid8()
    rng = np.random.default_rng(15)
    worst = 0.0
    for _ in range(10):
        p = random_frame(g, rng)
        k1, k4, k7 = rng.uniform(0.1, 3.0, size=3)
        K = (k1, 0, 0, k4, 0, 0, k7, 0, 0, k7, 0, 0)
        f_bi = total_energy(p, reduce_coefficients(ElasticCoefficients(K))).total
        f_of = oseen_frank_energy(p.column(0), k1, k4, k7, g)
        worst = max(worst, abs(f_bi - f_of) / (1.0 + abs(f_of)))
    return worst <= 1e-12, f"worst relative OF mismatch = {worst:.2e}"


def check_energy_difference_relation():
    g = _grid8()
    rng = np.random.default_rng(16)
    worst = 0.0
    for _ in range(10):
        p_old = random_frame(g, rng)
        p_new = random_frame(g, rng)
        rc = reduce_coefficients(
            ElasticCoefficients(tuple(rng.uniform(0, 5, size=12))))
        f_old = total_energy(p_old, rc).total
        f_new = total_energy(p_new, rc).total
        defect = energy_difference_defect(p_old, p_new, rc)
        worst = max(worst, abs(defect) / (1.0 + abs(f_new - f_old)))
    return worst <= 1e-10, f"worst scaled defect = {worst:.2e}"


def check_equal_state_collapse():
    g = _grid8()
    rng = np.random.default_rng(17)
    p = random_frame(g, rng, max_mode=2)
    rc = reduce_coefficients(
        ElasticCoefficients(tuple(rng.uniform(0.1, 3, size=12))))
    D = biaxial_discrete_gradient(p, p, rc)
    V = continuous_variation(p, rc)
    err = np.abs(D - V).max() / (1.0 + np.abs(V).max())
    return err <= 1e-13, f"collapse error = {err:.2e}"


def check_gonzalez():
    g = _grid8()
    rng = np.random.default_rng(18)
    p_old = random_frame(g, rng, max_mode=2)
    p_new = random_frame(g, rng, max_mode=2)
    rc = reduce_coefficients(
        ElasticCoefficients(tuple(rng.uniform(0.1, 3, size=12))))
    D = gonzalez_discrete_gradient(p_old, p_new, rc)
    f_old = total_energy(p_old, rc).total
    f_new = total_energy(p_new, rc).total
    defect = g.inner(D, p_new.data - p_old.data) - (f_new - f_old)
    rel = abs(defect) / (1.0 + abs(f_new - f_old))
    same = gonzalez_discrete_gradient(p_old, p_old, rc)
    finite = np.all(np.isfinite(same))
    return rel <= 1e-9 and finite, f"scaled defect = {rel:.2e}"


def check_cayley():
    g = SpectralGrid((6, 6, 1), (2, 2, 2), (-1, -1, -1))
    rng = np.random.default_rng(19)
    p = random_frame(g, rng)
    omega = rng.normal(size=g.counts + (3,))
    p2 = cayley_update(p, omega, 0.37)
    ok = p2.orthonormality_error() <= 1e-13 and p2.det_error() <= 1e-12
    return ok, (f"orthonormality {p2.orthonormality_error():.2e}, "
                f"det {p2.det_error():.2e}")


def check_adaptive_formula():
    a = AdaptiveSettings(tau_max=2e-3, tau_min=1e-5, alpha=1e-3)
    vals = (adaptive_dt(1.0, 1.0, 1e-3, a),
            adaptive_dt(0.0, 1e9, 1e-3, a),
            adaptive_dt(0.0, 1.0, 1e-3, a))
    expect0 = 2e-3
    expect2 = 2e-3 / np.sqrt(1.0 + 1e-3 * 1e6)
    ok = vals[0] == expect0 and vals[1] == 1e-5 \
        and abs(vals[2] - expect2) < 1e-18
    return ok, f"flat={vals[0]:.2e}, clamp={vals[1]:.2e}, mid={vals[2]:.3e}"


def check_tensor_form():
    KT = FrankTensorCoefficients((1, 1, 1), (1, 1, 1, 1, 1, 1))
    K = kijkl_to_frank(KT).K
    return np.allclose(K, 0.5, atol=1e-15), f"uniform conversion K = {K[0]}"


def check_short_flow():
    g = SpectralGrid((24, 24, 1), (2, 2, 2), (-1, -1, -1))
    p0 = initial_profile("meridian_swirl", g)
    coeffs = ElasticCoefficients((1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0))
    result = run_simulation(p0, coeffs, 0.05,
                            solver=SolverSettings(),
                            adaptive=AdaptiveSettings())
    hist = result.history
    worst_orth = max(rec.orthonormality_error for rec in hist)
    worst_defect = max(abs(rec.dissipation_defect)
                       / (1.0 + abs(rec.energy)) for rec in hist)
    decayed = hist[-1].energy < hist[0].energy
    ok = result.monotone and decayed and worst_orth <= 1e-12 \
        and worst_defect <= 1e-8
    return ok, (f"{len(hist)} steps, orth {worst_orth:.2e}, "
                f"dissipation defect {worst_defect:.2e}")


CHECKS = [
    ("integration by parts", check_integration_by_parts),
    ("div/curl compositions vanish", check_div_curl_identities),
    ("Euler frames on SO(3)", check_euler_frames),
    ("coefficient reduction", check_coefficient_reduction),
    ("energy form equivalence", check_energy_form_equivalence),
    ("Oseen-Frank reduction", check_oseen_frank_reduction),
    ("energy-difference relation", check_energy_difference_relation),
    ("equal-state gradient collapse", check_equal_state_collapse),
    ("Gonzalez gradient", check_gonzalez),
    ("Cayley update on SO(3)", check_cayley),
    ("adaptive step formula", check_adaptive_formula),
    ("tensor-form conversion", check_tensor_form),
    ("short dissipative run", check_short_flow),
]


def run_all(stream=None):
    """Run every check, print one line per result, return overall success."""
    import sys
    stream = stream or sys.stdout
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        stream.write(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}\n")
    stream.write("verify: " + ("all checks passed\n" if all_ok
                               else "FAILURES present\n"))
    return all_ok
