import pytest

from epibench import AnalyticDensity, GridPolicy
from epibench.identities import (Residual, blachman, complementary, complementary_general,
                                 debruijn_direct, deficit_coincidence, fi_representation,
                                 gvs_identity, mi_identity, mmse_representation,
                                 total_variance_step)
from epibench.oracles import McConfig, mc_mmse
from epibench.functionals import cond_var_additive
from conftest import FAMILY_SET, GAUSS, LAPLACE, MIXTURE, UNIFORM

G2 = AnalyticDensity.gaussian(0.0, 2.0)


def test_residual_record():
    r = Residual("x", 1.0, 1.0 + 2e-4, 1e-4, {"n": 1})
    assert r.residual == pytest.approx(-2e-4)
    assert not r.passed and r.status == "fail"
    assert Residual("x", 1.0, 1.0, 1e-4, inconclusive=True).status == "pass"
    assert Residual("x", 1.0, 2.0, 1e-4, inconclusive=True).status == "inconclusive"
    d = r.to_dict()
    assert d["residual"] == r.residual and d["method"] == {"n": 1}


# ---------------------------------------------------------------- complementary relation
def test_complementary_gaussian():
    assert abs(complementary(G2).residual) <= 1e-5


@pytest.mark.parametrize("name", list(FAMILY_SET))
def test_complementary_all_families(name):
    r = complementary(FAMILY_SET[name])
    assert r.passed and abs(r.residual) <= 1e-4


def test_complementary_mixture_variance_term_against_sampling():
    v = cond_var_additive(MIXTURE, 1.0)
    # Var(X | X + Z) equals Var(X | X + Z) with X + Z observed; the sampling
    # oracle uses the signal channel sqrt(1) X + Z, which is the same channel
    est, se = mc_mmse(MIXTURE, 1.0, McConfig(200_000, 99))
    assert abs(v - est) <= 3 * se


@pytest.mark.parametrize("name", list(FAMILY_SET))
@pytest.mark.parametrize("vz", [0.5, 2.0])
def test_complementary_general(name, vz):
    assert abs(complementary_general(FAMILY_SET[name], vz).residual) <= 1e-4


def test_complementary_general_specializes_at_unit_variance():
    a, b = complementary(LAPLACE), complementary_general(LAPLACE, 1.0)
    assert abs(a.residual - b.residual) <= 1e-12
    assert a.name == b.name == "complementary"


def test_complementary_general_gaussian_closed_form():
    assert abs(complementary_general(GAUSS, 2.0).residual) <= 1e-5
    with pytest.raises(ValueError):
        complementary_general(GAUSS, 0.0)


# ---------------------------------------------------------------- Blachman and total variance
def test_blachman_gaussian():
    assert abs(blachman(G2, [-3, -1, 0, 0.5, 2]).residual) <= 1e-6


def test_blachman_uniform_and_mixture():
    assert abs(blachman(UNIFORM, [0.0, 0.5, 1.0]).residual) <= 1e-4
    assert abs(blachman(MIXTURE, [-2.0, 2.0]).residual) <= 1e-4


def test_blachman_skips_probes_outside_support():
    r = blachman(UNIFORM, [0.5, 80.0])
    assert r.method["skipped"] == [80.0]
    assert r.passed


@pytest.mark.parametrize("d,tol", [(G2, 1e-5), (UNIFORM, 1e-4), (LAPLACE, 1e-4)],
                         ids=["gaussian", "uniform", "laplace"])
def test_total_variance_step(d, tol):
    r = total_variance_step(d)
    assert abs(r.residual) <= tol
    # Var(Z | X+Z) and Var(X | X+Z) are the same number, so this is the complementary relation
    assert abs(r.residual - complementary(d).residual) <= 1e-10


# ---------------------------------------------------------------- de Bruijn and Guo-Verdu-Shamai
@pytest.mark.parametrize("name", list(FAMILY_SET))
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 5.0])
def test_debruijn_and_gvs(name, t):
    d = FAMILY_SET[name]
    assert abs(debruijn_direct(d, t).residual) <= 1e-5
    assert abs(gvs_identity(d, t).residual) <= 1e-5


def test_debruijn_examples():
    assert abs(debruijn_direct(G2, 0.7).residual) <= 1e-6
    assert abs(debruijn_direct(UNIFORM, 0.5).residual) <= 1e-5
    assert abs(debruijn_direct(LAPLACE, 1.0, vz=2.0).residual) <= 1e-5


def test_gvs_examples():
    assert abs(gvs_identity(G2, 0.7).residual) <= 1e-6
    assert abs(gvs_identity(UNIFORM, 1.0).residual) <= 1e-5
    assert abs(gvs_identity(MIXTURE, 0.25).residual) <= 1e-5


def test_derivative_step_too_large_is_rejected():
    with pytest.raises(ValueError):
        debruijn_direct(UNIFORM, 1e-4)
    with pytest.raises(ValueError):
        gvs_identity(UNIFORM, 1e-4)


# ---------------------------------------------------------------- integral representations
def test_representations_exact_for_gaussian():
    assert abs(fi_representation(G2).residual) <= 1e-6
    assert abs(mmse_representation(G2).residual) <= 1e-6


def test_fi_representation_uniform_short_range():
    r = fi_representation(UNIFORM, 1 / 12, t_max=100)
    assert not r.inconclusive
    assert abs(r.residual) <= 1e-3


def test_mmse_representation_uniform():
    assert abs(mmse_representation(UNIFORM, t_max=1e4).residual) <= 1e-3


def test_short_range_is_inconclusive_not_failed():
    r = fi_representation(LAPLACE, t_max=1.0)
    assert r.inconclusive
    assert r.status in ("pass", "inconclusive")


@pytest.mark.parametrize("name", ["uniform", "laplace", "mixture"])
def test_representations_are_reference_independent(name):
    d = FAMILY_SET[name]
    hs = []
    for s2 in (0.25 * d.var, d.var, 16 * d.var):
        for fn in (fi_representation, mmse_representation):
            r = fn(d, s2)
            assert abs(r.residual) <= 1e-3
            hs.append(r.rhs)
    assert max(hs) - min(hs) <= 2e-3


# ---------------------------------------------------------------- deficits and informations
def test_deficit_coincidence():
    assert abs(deficit_coincidence(G2).residual) <= 1e-6
    assert abs(deficit_coincidence(UNIFORM).residual) <= 1e-4
    assert abs(deficit_coincidence(LAPLACE).residual) <= 1e-4


@pytest.mark.parametrize("name", list(FAMILY_SET))
def test_mi_identity(name):
    for t in (0.2, 1.0, 7.0):
        assert mi_identity(FAMILY_SET[name], t).passed


@pytest.mark.parametrize("name", ["uniform", "laplace", "exponential"])
def test_residuals_shrink_under_refinement(name):
    d = FAMILY_SET[name]
    coarse, fine = GridPolicy(n=1024), GridPolicy(n=4096)
    for check in (lambda p: complementary(d, policy=p), lambda p: debruijn_direct(d, 1.0, policy=p)):
        a, b = abs(check(coarse).residual), abs(check(fine).residual)
        assert b <= a or b <= 1e-8


def test_identities_reject_bare_grids():
    from epibench import discretize
    with pytest.raises(TypeError):
        complementary(discretize(GAUSS))
