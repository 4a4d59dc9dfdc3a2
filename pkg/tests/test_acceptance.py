"""Acceptance suite: twelve numbered criteria, one PASS/FAIL line each.

The lines are printed at the end of the pytest session (see ``conftest.py``)
and also when this file is run directly with ``python tests/test_acceptance.py``.
"""
import itertools
import math
import sys
from pathlib import Path

import numpy as np
import pytest

from epibench import AnalyticDensity, Law
from epibench import identities as ids
from epibench import inequalities as ineq
from epibench.cli import main as cli_main
from epibench.density import GridPolicy
from epibench.functionals import (entropy, fisher_information, mi_noise, mi_signal, mmse_signal)
from epibench.oracles import GaussianOracle, McConfig, in_band, mc_entropy, mc_mmse

sys.path.insert(0, str(Path(__file__).parent))
from conftest import FAMILY_SET  # noqa: E402

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
LAMBDAS = [round(0.1 * k, 1) for k in range(11)]
T_GEOM = list(np.geomspace(1e-3, 1e4, 8))
LAWS = {k: Law.of(d) for k, d in FAMILY_SET.items()}
SMOOTHED = {k: law.smoothed(0.01) for k, law in LAWS.items()}
PAIRS = list(itertools.combinations_with_replacement(FAMILY_SET, 2))

RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_01_gaussian_oracle_agreement():
    worst = 0.0
    for s2 in (0.25, 1.0, 4.0):
        law, g = Law.of(AnalyticDensity.gaussian(0.0, s2)), GaussianOracle(s2)
        pairs = [(entropy(law), g.h), (fisher_information(law), g.J)]
        for t in T_GEOM:
            pairs += [(mmse_signal(law, t), g.mmse(t)), (mi_noise(law, t), g.mi_noise(t)),
                      (mi_signal(law, t), g.mi_signal(t))]
        worst = max(worst, max(abs(a - b) / abs(b) for a, b in pairs))
    record(1, worst <= 1e-5, f"max relative error {worst:.2e} (tol 1e-5)")


def test_02_complementary_relation():
    worst = 0.0
    for law in LAWS.values():
        for vz in (1.0, 0.5, 2.0):
            worst = max(worst, abs(ids.complementary_general(law, vz).residual))
    record(2, worst <= 1e-4, f"max |J + Var - 1/vz| residual {worst:.2e} over 5 families x vz in {{0.5,1,2}} (tol 1e-4)")


def test_03_debruijn_and_gvs():
    worst = 0.0
    for law in LAWS.values():
        for t in (0.1, 0.5, 1.0, 5.0):
            worst = max(worst, abs(ids.debruijn_direct(law, t).residual),
                        abs(ids.gvs_identity(law, t).residual))
    record(3, worst <= 1e-5, f"max derivative residual {worst:.2e} (tol 1e-5)")


def test_04_integral_representations():
    err = spread = 0.0
    for name in ("uniform", "laplace", "mixture"):
        law = LAWS[name]
        for rep in (ids.fi_representation, ids.mmse_representation):
            vals = [rep(law, s2).rhs for s2 in (None, 4.0 * law.var)]
            err = max(err, abs(vals[0] - entropy(law)))
            spread = max(spread, abs(vals[0] - vals[1]))
    record(4, err <= 1e-3 and spread <= 2e-3,
           f"max |h_rep - h| {err:.2e} (tol 1e-3), reference spread {spread:.2e} (tol 2e-3)")


def test_05_deficit_coincidence():
    worst = max(abs(ids.deficit_coincidence(law).residual) for law in LAWS.values())
    record(5, worst <= 2e-4, f"max |D_J - D_V| {worst:.2e} (tol 2e-4)")


def test_06_entropy_power_inequality():
    lo, eq = math.inf, 0.0
    for a, b in PAIRS:
        p, q = LAWS[a], LAWS[b]
        lo = min(lo, ineq.epi_slack(p, q).slack)
        lo = min(lo, *(ineq.epi_concave_slack(p, q, lam).slack for lam in LAMBDAS))
    g1, g4 = Law.of(AnalyticDensity.gaussian(0, 1)), Law.of(AnalyticDensity.gaussian(1, 4))
    eq = max(abs(ineq.epi_slack(g1, g4).slack), abs(ineq.epi_slack(g4, g4).slack),
             *(abs(ineq.epi_concave_slack(g4, g4, lam).slack) for lam in LAMBDAS))
    uu = ineq.epi_slack(LAWS["uniform"], LAWS["uniform"]).slack
    ok = lo >= -1e-5 and eq <= 1e-4 and abs(uu - (math.e - 2)) <= 1e-3
    record(6, ok, f"min slack {lo:.2e}, Gaussian equality {eq:.2e}, U+U slack {uu:.6f} vs e-2")


def test_07_theorem_one():
    lo = math.inf
    for a, b in PAIRS:
        for lam in LAMBDAS:
            for t in T_GEOM:
                lo = min(lo, ineq.theorem1_slack(LAWS[a], LAWS[b], (lam, t)).slack)
    grid = [0.0, *T_GEOM]
    f0 = step = lim = 0.0
    for a, b in PAIRS:
        p, q = LAWS[a], LAWS[b]
        f = [v for _, v in ineq.deficit_f(p, q, 0.5, grid, strict=False)]
        f0 = max(f0, abs(f[0]))
        step = max(step, max(y - x for x, y in zip(f, f[1:])))
        lim = max(lim, abs(-f[-1] - ineq.epi_concave_slack(p, q, 0.5).slack))
    ok = lo >= -1e-5 and step <= 1e-4 and f0 <= 1e-8 and lim <= 1e-2
    record(7, ok, f"min slack {lo:.2e}, max f increase {step:.2e}, |f(0)| {f0:.1e}, "
                  f"|-f(1e4) - gap| {lim:.2e}")


def test_08_fisher_and_mmse_inequalities():
    lo, jk = math.inf, 0.0
    for a, b in PAIRS:
        p, q = SMOOTHED[a], SMOOTHED[b]
        lo = min(lo, ineq.fii_slack(p, q).slack)
        for lam in (0.1, 0.3, 0.5, 0.9):
            lo = min(lo, ineq.fii_weighted_slack(p, q, lam).slack)
            for t in (0.1, 1.0, 10.0):
                lo = min(lo, ineq.mmse_ineq_slack(p, q, (lam, t)).slack,
                         ineq.dj_ineq_slack(p, q, (lam, t)).slack)
                jk = max(jk, abs(ineq.jk_equivalence(p, q, (lam, t)).detail["residual"]))
    record(8, lo >= -1e-5 and jk <= 2e-4, f"min slack {lo:.2e} (tol -1e-5), max (j)/(k) residual {jk:.2e} (tol 2e-4)")


def test_09_discrete_epi():
    rng = np.random.default_rng(20240601)

    def pmf():
        k = int(rng.integers(1, 8))
        vals = np.sort(rng.choice(np.arange(-6, 7), size=k, replace=False)).astype(float)
        return ineq.DiscretePMF(tuple(vals), tuple(rng.dirichlet(np.ones(k))))

    lo = min(ineq.discrete_epi(pmf(), pmf(), lam).slack
             for lam in (0.5, 0.25, 0.8, 0.1, 0.5) for _ in range(5))
    x = ineq.DiscretePMF((0.0, 1.0), (0.5, 0.5))
    hw = ineq.discrete_epi(x, x, 0.5).detail["H_w"]
    ok = lo >= 0 and abs(hw - 1.5 * math.log(2)) <= 1e-15
    record(9, ok, f"min slack {lo:.3e} over 25 random pairs, binary H(W) - 1.5 ln2 = {hw - 1.5 * math.log(2):.1e}")


def test_10_monte_carlo():
    c, worst = McConfig(n_samples=1_000_000, seed=20240601), 0.0
    ok = True
    for name, d in FAMILY_SET.items():
        law = LAWS[name]
        checks = [(entropy(law), *mc_entropy(d, c))]
        checks += [(mmse_signal(law, t), *mc_mmse(d, t, c)) for t in (0.1, 1.0, 10.0)]
        for quad, est, se in checks:
            ok &= in_band(quad, est, se)
            if se > 0:
                worst = max(worst, abs(quad - est) / se)
    record(10, ok, f"largest deviation {worst:.2f} standard errors (band 3)")


def test_11_grid_convergence():
    base, fine = GridPolicy(n=4096), GridPolicy(n=8192)
    worst, where = 0.0, ""
    for name in FAMILY_SET:
        for law in (LAWS[name], SMOOTHED[name]):
            fns = {"h": entropy, "mmse": lambda l, p: mmse_signal(l, 1.0, p),
                   "mi_noise": lambda l, p: mi_noise(l, 1.0, p),
                   "mi_signal": lambda l, p: mi_signal(l, 1.0, p)}
            if law.smooth:
                fns["J"] = fisher_information
            for q, fn in fns.items():
                d = abs(fn(law, fine) - fn(law, base))
                if d > worst:
                    worst, where = d, f"{q} of {law.label}"
    record(11, worst <= 1e-5, f"max change n 4096 -> 8192 {worst:.2e} ({where}; tol 1e-5)")


def test_12_report_determinism(tmp_path):
    cfg = str(CONFIGS / "default.yaml")
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    codes = [cli_main(["report", "--config", cfg, "--out", str(o)]) for o in outs]
    same = outs[0].read_bytes() == outs[1].read_bytes()
    record(12, same and codes == [0, 0], f"byte-identical JSON: {same}, exit codes {codes}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
