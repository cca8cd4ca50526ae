import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kil import InsufficientData, Kernel, Region, classify, fit_rate, make_target, refinement_study
from kil.rates import ERROR_FLOOR, Sample, jittered_grid, regime_of


def pairs(beta, c=3.0, hs=(0.5, 0.25, 0.125, 0.0625)):
    return [(h, c * h**beta) for h in hs]


def test_fit_exact_power_law():
    fit = fit_rate(pairs(1.5), tau=1.0)
    assert fit.beta == pytest.approx(1.5)
    assert fit.stderr == pytest.approx(0, abs=1e-10)
    assert math.exp(fit.intercept) == pytest.approx(3.0)
    assert fit.regime == "superconvergence"
    assert fit.theta_hat == pytest.approx(1.5)


def test_fit_from_samples():
    samples = [Sample(n, 2**n, 2.0 ** -(n + 1), 2.0**-n, 2.0 ** (-2 * n), 0.0) for n in range(3, 7)]
    assert fit_rate(samples, 1.0).beta == pytest.approx(2.0)


def test_exact_regime():
    fit = fit_rate([(0.5, 1e-15), (0.25, 0.0), (0.125, 1e-14)], 1.0)
    assert fit.exact and math.isnan(fit.beta)
    rep = classify(fit)
    assert rep.regime == "exact" and math.isnan(rep.theta_hat)


def test_insufficient():
    with pytest.raises(InsufficientData):
        fit_rate(pairs(1.0)[:2], 1.0)
    with pytest.raises(InsufficientData):
        fit_rate([(0.5, 1.0), (0.25, 0.1), (0.125, ERROR_FLOOR / 10)], 1.0)


@pytest.mark.parametrize("beta,regime", [(0.7, "escaping"), (1.0, "escaping"), (1.01, "superconvergence"),
                                         (2.0, "superconvergence"), (2.3, "saturated")])
def test_regime_boundaries(beta, regime):
    assert regime_of(beta, 1.0) == regime


def test_classify_caps_and_flags():
    rep = classify(fit_rate(pairs(2.6), 1.0))
    assert rep.theta_hat == pytest.approx(2.6) and rep.theta_capped == 2.0
    assert rep.regime == "saturated"
    assert any("saturation" in f for f in rep.flags)
    assert classify(fit_rate(pairs(2.6), 1.0), target_is_zero=True).flags == ()


def test_classify_statement():
    rep = classify(fit_rate(pairs(0.7), 1.0))
    assert rep.statement == "f in H_theta for all theta < 0.7"
    assert rep.flags == ()
    assert "boundary" in classify(fit_rate(pairs(2.0), 1.0)).statement


def test_targets(hat, unit):
    x = np.array([[0.0], [0.5], [1.0]])
    np.testing.assert_allclose(make_target("exp", hat, unit, 6)(x).ravel(), np.exp(x).ravel())
    np.testing.assert_allclose(make_target("abs-power:1,0.5", hat, unit, 6)(x), [0.5, 0, 0.5])
    np.testing.assert_allclose(make_target("kernel-translate:0.25", hat, unit, 6)(x), [0.75, 0.75, 0.25])
    np.testing.assert_allclose(make_target("sin:2", hat, unit, 6)(x), np.sin(2 * x).ravel())
    assert make_target("zero", hat, unit, 6).is_zero
    tv = make_target("tv-power:1", hat, unit, 8)
    # T of z on [0,1] at x = 0: int (1 - y) y dy = 1/6
    assert tv([[0.0]])[0] == pytest.approx(1 / 6, rel=1e-4)


@pytest.mark.parametrize("desc", ["nope", "sin", "abs-power", "tv-power:1,2", "abs-power:1,0,0"])
def test_bad_targets(hat, unit, desc):
    with pytest.raises(ValueError):
        make_target(desc, hat, unit, 6)


def test_refinement_study_shapes(hat, unit):
    f = make_target("exp", hat, unit, 8)
    samples = refinement_study(f, hat, unit, range(2, 5))
    assert [s.n for s in samples] == [2, 3, 4]
    assert [s.num_points for s in samples] == [4, 8, 16]
    assert samples[1].q == pytest.approx(1 / 16)
    assert samples[1].h == pytest.approx(1 / 8)
    assert all(a.l2_error > b.l2_error for a, b in zip(samples, samples[1:]))


def test_jittered_is_seeded(hat, unit):
    f = make_target("exp", hat, unit, 8)
    a = refinement_study(f, hat, unit, [3, 4, 5], points="jittered", seed=4)
    b = refinement_study(f, hat, unit, [3, 4, 5], points="jittered", seed=4)
    assert a == b
    assert all(s.rho < 4 for s in a)
    X = jittered_grid(unit, 4, np.random.default_rng(0))
    assert np.all((X > 0) & (X < 1))


def test_jittered_rate_matches_grid(hat, unit):
    f = make_target("tv-power:-0.45", hat, unit, 10)
    grid = fit_rate(refinement_study(f, hat, unit, range(3, 8)), 1.0).beta
    jit = fit_rate(refinement_study(f, hat, unit, range(3, 8), points="jittered", seed=1), 1.0).beta
    assert abs(grid - jit) < 0.3


def test_unknown_points(hat, unit):
    with pytest.raises(ValueError):
        refinement_study(np.cos, hat, unit, [3], points="random")


def test_two_dimensional_study():
    k, r = Kernel("matern-half", 1.0, 2), Region.parse("disk:0,0,1")
    f = make_target("exp", k, r, 6)
    samples = refinement_study(f, k, r, [2, 3, 4], quad_level_offset=2)
    assert samples[0].l2_error > samples[-1].l2_error


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 4.0), st.floats(1e-3, 1e3), st.integers(3, 8))
def test_slope_recovery(beta, c, m):
    hs = 2.0 ** -np.arange(1, m + 1)
    fit = fit_rate([(h, c * h**beta) for h in hs], tau=1.0)
    assert fit.beta == pytest.approx(beta, rel=1e-9)
    assert fit.regime == regime_of(beta, 1.0)
