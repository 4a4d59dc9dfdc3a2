import math

import pytest
from hypothesis import given, settings, strategies as st

from epibench import Law
from epibench.functionals import entropy, fisher_information, mmse_signal
from epibench.identities import fi_representation
from epibench.oracles import (GaussianOracle, McConfig, UnsupportedError, closed_form,
                              convergence_study, in_band, mc_entropy, mc_mmse, mi_noise_oracle,
                              quad_entropy)
from conftest import EXPON, FAMILY_SET, GAUSS, HALF_LOG_2PI_E, LAPLACE, MIXTURE, UNIFORM

MC = McConfig(n_samples=1_000_000, seed=7)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(0.0, 1e4))
def test_gaussian_oracle_relations(s2, t):
    g = GaussianOracle(s2)
    assert g.complementary() == pytest.approx(1.0, abs=1e-15)
    assert g.mmse(t) == pytest.approx(1 / (1 / s2 + t), rel=1e-12)
    # I(t) = mi_noise at noise precision 1/t after rescaling, and dI/dt = mmse/2
    if t > 0:
        assert g.mi_signal(t) == pytest.approx(GaussianOracle(1 / s2).mi_noise(t), rel=1e-12)
        dt = 1e-6 * t
        d = (g.mi_signal(t + dt) - g.mi_signal(t - dt)) / (2 * dt)
        assert d == pytest.approx(0.5 * g.mmse(t), rel=1e-5)
    assert g.rho ** 2 == pytest.approx(s2 / (s2 + 1))


def test_gaussian_oracle_rejects_nonpositive_variance():
    with pytest.raises(ValueError):
        GaussianOracle(0.0)


def test_closed_form_examples():
    assert closed_form("gaussian", {"mean": 0, "var": 1}, "J") == 1.0
    assert closed_form("gaussian", {"var": 2}, "h") == pytest.approx(HALF_LOG_2PI_E + 0.5 * math.log(2))
    assert closed_form("uniform", {"a": 0, "b": 1}, "h") == 0.0
    assert closed_form("laplace", {"loc": 0, "scale": 1}, "h") == pytest.approx(1 + math.log(2))
    assert closed_form("laplace", {"scale": 2}, "J") == pytest.approx(0.25)
    assert closed_form("exponential", {"rate": 2}, "h") == pytest.approx(1 - math.log(2))
    assert closed_form("gaussian", {"var": 4}, "mmse", t=1.0) == pytest.approx(0.8)


@pytest.mark.parametrize("family,params,quantity", [
    ("uniform", {}, "J"), ("exponential", {}, "J"), ("laplace", {}, "mmse"),
    ("mixture", {"weights": [1], "means": [0], "variances": [1]}, "h"),
])
def test_closed_form_unsupported(family, params, quantity):
    with pytest.raises(UnsupportedError):
        closed_form(family, params, quantity, t=1.0)


def test_closed_form_needs_t():
    with pytest.raises(ValueError):
        closed_form("gaussian", {}, "mmse")


@pytest.mark.parametrize("d,exact", [(GAUSS, HALF_LOG_2PI_E), (UNIFORM, 0.0),
                                     (LAPLACE, 1 + math.log(2)), (EXPON, 1.0)])
def test_adaptive_quadrature_entropy(d, exact):
    assert quad_entropy(d) == pytest.approx(exact, abs=1e-9)


def test_adaptive_quadrature_against_grid_engine(family):
    law = Law.of(family)
    for v in (0.0, 0.3):
        grid = entropy(law.smoothed(v) if v else law)
        # trapezoid error at a raw kink or jump is a few 1e-7
        assert quad_entropy(family, v) == pytest.approx(grid, abs=1e-7 if v else 1e-6)
    assert mi_noise_oracle(GAUSS, 3.0) == pytest.approx(0.5 * math.log(4), abs=1e-9)


# ---------------------------------------------------------------- Monte Carlo
def test_mc_entropy_gaussian_band():
    est, se = mc_entropy(GAUSS, MC)
    assert in_band(1.418939, est, se) and se < 2e-3


def test_mc_entropy_uniform_is_exact():
    assert mc_entropy(UNIFORM, MC) == (0.0, 0.0)


def test_mc_is_deterministic():
    c = McConfig(50_000, seed=99, shards=4)
    assert mc_entropy(LAPLACE, c) == mc_entropy(LAPLACE, c)
    assert mc_entropy(LAPLACE, c, threads=4) == mc_entropy(LAPLACE, c, threads=1)
    assert mc_mmse(MIXTURE, 1.0, c) == mc_mmse(MIXTURE, 1.0, c)
    assert mc_entropy(LAPLACE, McConfig(50_000, seed=100)) != mc_entropy(LAPLACE, McConfig(50_000, seed=99))


def test_mc_mmse_gaussian():
    est, se = mc_mmse(GAUSS, 1.0, MC)
    assert in_band(0.5, est, se)
    est, _ = mc_mmse(GAUSS, 1e4, McConfig(100_000, seed=1))
    assert est < 2e-4


@pytest.mark.parametrize("name", list(FAMILY_SET))
def test_mc_brackets_quadrature(name):
    d = FAMILY_SET[name]
    est, se = mc_entropy(d, MC)
    assert in_band(entropy(Law.of(d)), est, se)
    est, se = mc_mmse(d, 1.0, MC)
    assert in_band(mmse_signal(Law.of(d), 1.0), est, se)


def test_mc_config_validation():
    for kw in ({"n_samples": 0}, {"seed": -1}, {"shards": 0}, {"n_samples": 3, "shards": 4}):
        with pytest.raises(ValueError):
            McConfig(**kw)
    with pytest.raises(ValueError):
        mc_mmse(GAUSS, 0.0)


# ---------------------------------------------------------------- convergence
SIZES = [512, 1024, 2048, 4096, 8192]


def test_convergence_gaussian_entropy():
    s = convergence_study("entropy", Law.of(GAUSS), SIZES)
    assert [r.n for r in s.rows] == SIZES
    assert s.converged and s.monotone and not s.flagged
    assert s.rows[-1].value == pytest.approx(HALF_LOG_2PI_E, abs=1e-9)


def test_convergence_smoothed_uniform_fisher():
    law = Law.of(UNIFORM).smoothed(0.01)
    s = convergence_study("fisher_information", law, SIZES)
    assert not s.flagged
    assert s.rows[-1].value == pytest.approx(fisher_information(law), rel=1e-9)


def test_convergence_fi_representation_residual():
    def resid(law, pol):
        return fi_representation(law, policy=pol).residual
    s = convergence_study(resid, Law.of(LAPLACE), [1024, 2048, 4096])
    assert s.quantity == "resid" and not s.flagged


def test_convergence_flags_a_drifting_sequence():
    s = convergence_study(lambda d, pol: 1.0 / pol.n, GAUSS, [64, 128, 256], tol=1e-5)
    assert s.monotone and not s.converged and s.flagged
    s = convergence_study(lambda d, pol: math.sqrt(pol.n), GAUSS, [64, 128, 256], tol=1e-5)
    assert not s.monotone


def test_convergence_rejects_bad_sizes():
    with pytest.raises(ValueError):
        convergence_study("entropy", GAUSS, [512, 1024])
    with pytest.raises(ValueError):
        convergence_study("entropy", GAUSS, [512, 2048, 1024])
