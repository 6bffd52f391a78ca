import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import curve_fit

from ladderent.analysis import (
    ScalingFit,
    compare_exact_rvb,
    exact_ggm_point,
    fidelity,
    fit_scaling,
    odd_even_report,
    rvb_ggm_point,
    rvb_recursion_checks,
    rvb_recursive_ggm_series,
)
from ladderent.errors import AmbiguityError, DomainError
from ladderent.hilbert import StateVector
from ladderent.lattice import build_ladder

NS = [8, 12, 16, 20, 24, 32]


def synthetic(gc, k, x, sign, ns=NS):
    s = 1.0 if sign == "+" else -1.0
    return [(n, gc + s * k * n ** (-x)) for n in ns]


def test_synthetic_recovery():
    fit = fit_scaling(synthetic(0.40, 0.30, 1.2, "+"))
    assert fit.sign == "+"
    assert abs(fit.G_c - 0.40) < 1e-6
    assert abs(fit.k - 0.30) < 1e-6
    assert abs(fit.x - 1.2) < 1e-6
    assert fit.residual < 1e-10
    assert not fit.degenerate


def test_negative_sign_recovered():
    fit = fit_scaling(synthetic(0.25, 0.5, 0.8, "-"))
    assert fit.sign == "-"
    assert abs(fit.x - 0.8) < 1e-6


def test_constant_data_degenerate():
    fit = fit_scaling([(n, 0.3) for n in NS])
    assert fit.degenerate and fit.k == 0.0
    assert fit.G_c == pytest.approx(0.3, abs=1e-15)


def test_too_few_points():
    with pytest.raises(DomainError):
        fit_scaling(synthetic(0.4, 0.3, 1.2, "+", ns=[8, 12, 16]))


def test_repeated_sizes():
    pts = synthetic(0.4, 0.3, 1.2, "+")
    with pytest.raises(DomainError):
        fit_scaling(pts + [pts[0]])


def test_non_monotone_needs_hint():
    pts = synthetic(0.4, 0.3, 1.2, "+")
    pts[2] = (pts[2][0], pts[2][1] + 0.01)
    with pytest.raises(AmbiguityError):
        fit_scaling(pts)
    fit = fit_scaling(pts, sign_hint="+")
    assert fit.sign == "+" and fit.residual > 0


def test_bad_hint():
    with pytest.raises(DomainError):
        fit_scaling(synthetic(0.4, 0.3, 1.2, "+"), sign_hint="up")


def test_matches_scipy_on_noisy_data():
    rng = np.random.default_rng(3)
    pts = [(n, g + 1e-4 * rng.standard_normal()) for n, g in synthetic(0.4, 0.3, 1.2, "+")]
    ours = fit_scaling(pts)
    n = np.array([p[0] for p in pts], float)
    g = np.array([p[1] for p in pts])
    ref, _ = curve_fit(lambda n, gc, k, x: gc + k * n ** (-x), n, g, p0=[0.4, 0.3, 1.2],
                       xtol=1e-14, ftol=1e-14, maxfev=100_000)
    assert np.allclose([ours.G_c, ours.k, ours.x], ref, rtol=1e-5, atol=1e-7)
    rms = np.sqrt(np.mean((g - (ref[0] + ref[1] * n ** (-ref[2]))) ** 2))
    assert ours.residual <= rms * (1 + 1e-8)


@given(st.floats(0.1, 0.5), st.floats(0.05, 2.0), st.floats(0.3, 2.5), st.sampled_from("+-"))
def test_fit_direction_and_determinism(gc, k, x, sign):
    pts = synthetic(gc, k, x, sign)
    a = fit_scaling(pts)
    b = fit_scaling(list(reversed(pts)))
    assert (a.G_c, a.k, a.x, a.residual) == (b.G_c, b.k, b.x, b.residual)
    assert a.sign == sign
    curve = a.predict(np.linspace(8, 32, 50))
    steps = np.diff(curve)
    assert np.all(steps < 0) if sign == "+" else np.all(steps > 0)


def test_predict_and_dict():
    fit = fit_scaling(synthetic(0.40, 0.30, 1.2, "+"))
    assert fit.predict(8) == pytest.approx(0.40 + 0.30 * 8 ** -1.2, abs=1e-9)
    assert set(fit.to_dict()) == {"G_c", "k", "x", "sign", "residual", "points_used", "degenerate"}


def make_fit(gc, x):
    return ScalingFit(gc, 0.1, x, "+", 0.0, [])


def test_odd_even_identical_fits():
    fits = {L: make_fit(0.3, 1.0) for L in (1, 2, 3, 4)}
    rep = odd_even_report(fits)
    assert rep["G_c_gap"] == 0.0 and rep["x_gap"] == 0.0
    assert [r["legs"] for r in rep["odd"]] == [1, 3]
    assert [r["legs"] for r in rep["even"]] == [2, 4]
    assert rep["largest_comparable"] == [3, 4]


def test_odd_even_gaps():
    fits = {1: make_fit(0.40, 1.0), 2: make_fit(0.20, 3.0), 3: make_fit(0.41, 1.5),
            4: make_fit(0.25, 4.0)}
    rep = odd_even_report(fits)
    assert rep["G_c_gap"] == pytest.approx(0.16)
    assert rep["x_gap"] == pytest.approx(2.5)
    assert len(rep["adjacent_gaps"]) == 3


def test_odd_even_needs_both_parities():
    with pytest.raises(DomainError):
        odd_even_report({1: make_fit(0.3, 1), 3: make_fit(0.3, 1), 5: make_fit(0.3, 1)})


# comparison ------------------------------------------------------------------

def test_compare_singlet():
    rec = compare_exact_rvb(build_ladder(1, 2))
    assert rec.fidelity == pytest.approx(1.0, abs=1e-12)
    assert rec.delta_e == pytest.approx(0.0, abs=1e-12)


def test_compare_plaquette():
    rec = compare_exact_rvb(build_ladder(2, 2))
    assert abs(rec.fidelity - 1.0) < 1e-9


@pytest.mark.parametrize("legs,rungs,boundary", [(2, 4, "periodic"), (2, 4, "open"), (3, 4, "open")])
def test_compare_reports(legs, rungs, boundary):
    rec = compare_exact_rvb(build_ladder(legs, rungs, boundary))
    assert 0.0 <= rec.fidelity <= 1.0
    assert rec.delta_e >= 0.0
    assert rec.energy_rvb >= rec.energy_exact - 1e-10
    assert rec.delta_e == pytest.approx(abs(rec.energy_rvb - rec.energy_exact) / abs(rec.energy_exact))


def test_compare_per_site_variant():
    g = build_ladder(2, 4, "periodic")
    rec = compare_exact_rvb(g, per_site=True)
    assert rec.delta_e == pytest.approx(abs(rec.energy_rvb - rec.energy_exact) / g.n)


def test_compare_limits():
    with pytest.raises(DomainError):
        compare_exact_rvb(build_ladder(2, 9))
    with pytest.raises(DomainError):
        compare_exact_rvb(build_ladder(2, 3))


@given(st.integers(1, 6), st.integers(0, 1000), st.integers(0, 1000))
def test_fidelity_symmetry(n, s1, s2):
    r1, r2 = np.random.default_rng(s1), np.random.default_rng(s2)
    a = StateVector(n, r1.standard_normal(1 << n) + 1j * r1.standard_normal(1 << n)).normalize()
    b = StateVector(n, r2.standard_normal(1 << n) + 1j * r2.standard_normal(1 << n)).normalize()
    assert fidelity(a, b) == fidelity(b, a)
    assert 0.0 <= fidelity(a, b) <= 1.0 + 1e-15


# pipelines -----------------------------------------------------------------------

@pytest.mark.parametrize("legs,boundary", [(1, "periodic"), (2, "periodic"), (3, "periodic"),
                                           (2, "open"), (3, "open")])
def test_recursive_series_matches_enumeration(legs, boundary):
    ms = [m for m in (2, 4, 6) if legs * m <= 18 and not (boundary == "periodic" and m < 4)]
    series = rvb_recursive_ggm_series(legs, ms, boundary)
    for point in series:
        ref = rvb_ggm_point(build_ladder(legs, point.rungs, boundary))
        assert point.ggm == pytest.approx(ref.ggm, abs=1e-12)
        assert point.argmax_sites == ref.argmax_sites


def test_exact_point_fields():
    p = exact_ggm_point(build_ladder(1, 2))
    assert p.ggm == pytest.approx(0.5, abs=1e-12)
    assert p.model == "exact" and p.strategy == "restricted"
    assert p.argmax_sites == (0,)


def test_recursion_checks_small():
    checks = rvb_recursion_checks(max_spins=12)
    assert checks and all(c["pass"] for c in checks)
    kinds = {c["check"] for c in checks}
    assert kinds == {"state_fidelity", "norm", "block_rdm"}
