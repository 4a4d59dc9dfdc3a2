"""Inequalities between information functionals, reported as signed slacks.

A slack is ``rhs_side - lhs_side`` arranged so that the inequality reads
``slack >= 0``.  A report passes when ``slack >= -tol``; when equality is
expected (Gaussian inputs) it must also satisfy ``|slack| <= tol``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .density import (DEFAULT_POLICY, ChannelPoint, Law, as_law, combine_vp, convolve,
                      gaussian_smooth)
from .functionals import (entropy, fisher_information, mi_noise, mi_signal, mmse_signal,
                          variance)

MERGE_TOL = 1e-12


@dataclass
class SlackReport:
    name: str
    point: Optional[ChannelPoint]
    slack: float
    tol: float
    equality_expected: bool = False
    detail: dict = field(default_factory=dict)

    @property
    def passed(self):
        if not self.slack >= -self.tol:
            return False
        return abs(self.slack) <= self.tol if self.equality_expected else True

    @property
    def status(self):
        return "pass" if self.passed else "fail"

    def to_dict(self):
        d = asdict(self)
        d["point"] = None if self.point is None else {"lam": self.point.lam, "t": self.point.t}
        d.update(passed=self.passed, status=self.status)
        return d


def _gaussian(p):
    law = as_law(p)
    return isinstance(law, Law) and law.is_gaussian


def _lam(lam):
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return lam


def _point(pt):
    return pt if isinstance(pt, ChannelPoint) else ChannelPoint(*pt)


def _smooth(p, t, policy):
    law = as_law(p)
    if isinstance(law, Law):
        return law.smoothed(t) if t > 0 else law
    return gaussian_smooth(law, t, policy) if t > 0 else law


# ------------------------------------------------------------------ entropy power
def epi_slack(p, q, tol=1e-5, eq_rel_tol=1e-4, policy=DEFAULT_POLICY):
    """exp(2h(X+Y)) - exp(2h(X)) - exp(2h(Y)).

    For Gaussian pairs equality is judged relative to ``exp(2h(X+Y))``.
    """
    nx = math.exp(2 * entropy(p, policy))
    ny = math.exp(2 * entropy(q, policy))
    nw = math.exp(2 * entropy(convolve(as_law(p), as_law(q), policy), policy))
    eq = _gaussian(p) and _gaussian(q)
    slack = nw - nx - ny
    rep = SlackReport("epi", None, slack, tol, False,
                      {"N_x": nx, "N_y": ny, "N_w": nw, "relative": slack / nw})
    if eq:
        rep.equality_expected = True
        rep.tol = max(tol, eq_rel_tol * nw)
    return rep


def lambda_star(p, q, policy=DEFAULT_POLICY):
    """The weight e^{2h(X)} / (e^{2h(X)} + e^{2h(Y)}) equalizing the scaled entropies."""
    hx, hy = entropy(p, policy), entropy(q, policy)
    # logistic form avoids overflow of the entropy powers
    return 1.0 / (1.0 + math.exp(2 * (hy - hx)))


def _vp(p, q, lam, policy):
    return combine_vp(as_law(p), as_law(q), lam, policy)


def _iid_gaussian(p, q):
    if not (_gaussian(p) and _gaussian(q)):
        return False
    a, b = as_law(p), as_law(q)
    return abs(a.var - b.var) <= 1e-12 * max(a.var, b.var)


def epi_concave_slack(p, q, lam, tol=1e-5, policy=DEFAULT_POLICY):
    """h(W) - lam h(X) - (1 - lam) h(Y) for W = sqrt(lam) X + sqrt(1 - lam) Y."""
    lam = _lam(lam)
    hx, hy = entropy(p, policy), entropy(q, policy)
    hw = entropy(_vp(p, q, lam, policy), policy)
    eq = lam in (0.0, 1.0) or _iid_gaussian(p, q)
    return SlackReport("epi_concave", ChannelPoint(lam, 0.0), hw - lam * hx - (1 - lam) * hy,
                       tol, eq, {"h_x": hx, "h_y": hy, "h_w": hw})


# ------------------------------------------------------------------ Theorem 1 and f(t)
def _f_value(p, q, lam, t, policy):
    if t == 0:
        return 0.0, (0.0, 0.0, 0.0)
    ix = mi_noise(p, t, policy)
    iy = mi_noise(q, t, policy)
    iw = mi_noise(_vp(p, q, lam, policy), t, policy)
    return iw - lam * ix - (1 - lam) * iy, (ix, iy, iw)


def theorem1_slack(p, q, pt, tol=1e-5, policy=DEFAULT_POLICY):
    """lam I(X+sqrt(t)Z; Z) + (1-lam) I(Y+sqrt(t)Z; Z) - I(W+sqrt(t)Z; Z)."""
    pt = _point(pt)
    f, (ix, iy, iw) = _f_value(p, q, pt.lam, pt.t, policy)
    eq = pt.t == 0 or pt.lam in (0.0, 1.0) or _iid_gaussian(p, q)
    return SlackReport("theorem1", pt, -f, tol, eq, {"mi_x": ix, "mi_y": iy, "mi_w": iw})


def deficit_f(p, q, lam, t_grid, tol_mono=1e-4, policy=DEFAULT_POLICY, strict=True):
    """f(t) = I(W+sqrt(t)Z; Z) - lam I(X+sqrt(t)Z; Z) - (1-lam) I(Y+sqrt(t)Z; Z).

    Returns ``[(t, f(t)), ...]``.  With ``strict`` it raises ``AssertionError``
    if ``f(0) != 0`` or ``f`` increases by more than ``tol_mono`` between grid points.
    """
    lam = _lam(lam)
    ts = [float(t) for t in t_grid]
    if any(b <= a for a, b in zip(ts, ts[1:])) or ts[0] < 0:
        raise ValueError("t_grid must be increasing and nonnegative")
    out = [(t, _f_value(p, q, lam, t, policy)[0]) for t in ts]
    if not strict:
        return out
    if ts[0] == 0.0:
        assert abs(out[0][1]) <= 1e-8, f"f(0) = {out[0][1]} is not zero"
    for (ta, fa), (tb, fb) in zip(out, out[1:]):
        assert fb <= fa + tol_mono, f"f increases from t={ta} ({fa}) to t={tb} ({fb})"
    return out


# ------------------------------------------------------------------ Fisher information
def fii_slack(p, q, tol=1e-5, policy=DEFAULT_POLICY):
    """1/J(X+Y) - 1/J(X) - 1/J(Y)."""
    jx = fisher_information(p, policy)
    jy = fisher_information(q, policy)
    jw = fisher_information(convolve(as_law(p), as_law(q), policy), policy)
    return SlackReport("fii", None, 1 / jw - 1 / jx - 1 / jy, tol,
                       _gaussian(p) and _gaussian(q), {"J_x": jx, "J_y": jy, "J_w": jw})


def fii_lambda(p, q, policy=DEFAULT_POLICY):
    """The weight J(Y) / (J(X) + J(Y)) at which the weighted form gives ``fii_slack``."""
    jx = fisher_information(p, policy)
    jy = fisher_information(q, policy)
    return jy / (jx + jy)


def fii_weighted_slack(p, q, lam, tol=1e-5, policy=DEFAULT_POLICY):
    """lam J(X) + (1 - lam) J(Y) - J(W)."""
    lam = _lam(lam)
    jx = fisher_information(p, policy)
    jy = fisher_information(q, policy)
    jw = fisher_information(_vp(p, q, lam, policy), policy)
    eq = lam in (0.0, 1.0) or _iid_gaussian(p, q)
    return SlackReport("fii_weighted", ChannelPoint(lam, 0.0), lam * jx + (1 - lam) * jy - jw,
                       tol, eq, {"J_x": jx, "J_y": jy, "J_w": jw})


# ------------------------------------------------------------------ smoothed forms
def mmse_ineq_slack(p, q, pt, tol=1e-5, policy=DEFAULT_POLICY):
    """Var(W | sqrt(t)W + Z) - lam Var(X | sqrt(t)X + Z) - (1-lam) Var(Y | sqrt(t)Y + Z).

    The subtracted combination is also Var(W | sqrt(t)X + Z', sqrt(t)Y + Z''),
    since independence of X and Y factors the joint posterior.
    """
    pt = _point(pt)
    lam, t = pt.lam, pt.t
    if t == 0:
        vx, vy = variance(p, policy), variance(q, policy)
        vw = variance(_vp(p, q, lam, policy), policy)
    else:
        vx, vy = mmse_signal(p, t, policy), mmse_signal(q, t, policy)
        vw = mmse_signal(_vp(p, q, lam, policy), t, policy)
    two_obs = lam * vx + (1 - lam) * vy
    eq = t == 0 or lam in (0.0, 1.0) or _iid_gaussian(p, q)
    return SlackReport("mmse_ineq", pt, vw - two_obs, tol, eq,
                       {"mmse_x": vx, "mmse_y": vy, "mmse_w": vw, "two_observation": two_obs})


def dj_ineq_slack(p, q, pt, tol=1e-5, policy=DEFAULT_POLICY):
    """lam J(X+sqrt(t)Z) + (1-lam) J(Y+sqrt(t)Z) - J(W+sqrt(t)Z)."""
    pt = _point(pt)
    lam, t = pt.lam, pt.t
    if not t > 0:
        raise ValueError("t must be positive for the smoothed Fisher information")
    jx = fisher_information(_smooth(p, t, policy), policy)
    jy = fisher_information(_smooth(q, t, policy), policy)
    jw = fisher_information(_smooth(_vp(p, q, lam, policy), t, policy), policy)
    eq = lam in (0.0, 1.0) or _iid_gaussian(p, q)
    return SlackReport("dj_ineq", pt, lam * jx + (1 - lam) * jy - jw, tol, eq,
                       {"J_x": jx, "J_y": jy, "J_w": jw})


def jk_equivalence(p, q, pt, tol=2e-4, policy=DEFAULT_POLICY):
    """Difference between ``dj_ineq_slack`` and its value predicted from ``mmse_ineq_slack``.

    With J(X + sqrt(t) Z) = (1 - Var(X | X/sqrt(t) + Z) / t) / t the smoothed
    Fisher slack at t is the MMSE slack at 1/t divided by t^2.
    """
    pt = _point(pt)
    dj = dj_ineq_slack(p, q, pt, policy=policy)
    mk = mmse_ineq_slack(p, q, ChannelPoint(pt.lam, 1.0 / pt.t), policy=policy)
    predicted = mk.slack / pt.t ** 2
    resid = dj.slack - predicted
    return SlackReport("jk_equivalence", pt, -abs(resid), tol, True,
                       {"dj_slack": dj.slack, "from_mmse": predicted, "residual": resid})


def reduction_consistency(p, q, pt, policy=DEFAULT_POLICY):
    """The same smoothed Fisher slack computed from deficits D_J = J - 1/(s2 + t).

    Returns ``(deficit_form, direct_form)``; the Gaussian reference terms cancel
    because W has variance lam s2_x + (1 - lam) s2_y.
    """
    pt = _point(pt)
    lam, t = pt.lam, pt.t
    rep = dj_ineq_slack(p, q, pt, policy=policy)
    sx, sy = variance(p, policy), variance(q, policy)
    sw = lam * sx + (1 - lam) * sy
    d = rep.detail
    dx = d["J_x"] - 1 / (sx + t)
    dy = d["J_y"] - 1 / (sy + t)
    dw = d["J_w"] - 1 / (sw + t)
    ref = lam / (sx + t) + (1 - lam) / (sy + t) - 1 / (sw + t)
    return lam * dx + (1 - lam) * dy - dw + ref, rep.slack


# ------------------------------------------------------------------ discrete case
@dataclass(frozen=True)
class DiscretePMF:
    values: tuple
    probs: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if v.ndim != 1 or v.size == 0 or v.shape != p.shape:
            raise ValueError("values and probs must be non-empty and of equal length")
        if np.any(np.diff(v) <= 0):
            raise ValueError("values must be strictly increasing")
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be positive and sum to 1")
        object.__setattr__(self, "values", tuple(v.tolist()))
        object.__setattr__(self, "probs", tuple(p.tolist()))

    @classmethod
    def from_samples(cls, values, probs, merge_tol=MERGE_TOL):
        """Sort, merge values closer than ``merge_tol`` and sum their probabilities."""
        v = np.asarray(values, dtype=float)
        p = np.asarray(probs, dtype=float)
        order = np.argsort(v, kind="stable")
        v, p = v[order], p[order]
        keep = p > 0
        v, p = v[keep], p[keep]
        # start a new atom wherever the gap to the previous value exceeds the tolerance
        start = np.concatenate(([True], np.diff(v) > merge_tol))
        idx = np.cumsum(start) - 1
        merged_p = np.bincount(idx, weights=p)
        merged_v = v[start]
        return cls(tuple(merged_v), tuple(merged_p / merged_p.sum()))

    def entropy(self):
        p = np.asarray(self.probs)
        return float(-np.sum(p * np.log(p)))


def combine_discrete(x, y, lam, merge_tol=MERGE_TOL):
    """PMF of sqrt(lam) X + sqrt(1 - lam) Y for independent X and Y."""
    lam = _lam(lam)
    a, b = math.sqrt(lam), math.sqrt(1.0 - lam)
    vals = a * np.asarray(x.values)[:, None] + b * np.asarray(y.values)[None, :]
    probs = np.asarray(x.probs)[:, None] * np.asarray(y.probs)[None, :]
    return DiscretePMF.from_samples(vals.ravel(), probs.ravel(), merge_tol)


def discrete_epi(x, y, lam, merge_tol=MERGE_TOL, tol=1e-12):
    """H(W) - max(H(X), H(Y)); the inequality is asserted for lam strictly inside (0, 1)."""
    lam = _lam(lam)
    w = combine_discrete(x, y, lam, merge_tol)
    hx, hy, hw = x.entropy(), y.entropy(), w.entropy()
    rep = SlackReport("discrete_epi", ChannelPoint(lam, 0.0), hw - max(hx, hy), tol, False,
                      {"H_x": hx, "H_y": hy, "H_w": hw, "support_w": len(w.values),
                       "asserted": 0.0 < lam < 1.0})
    return rep


# ------------------------------------------------------------------ EPI from Theorem 1
def epi_limit_recovery(p, q, lam, t_grid, tol=1e-5, policy=DEFAULT_POLICY):
    """Entropy gap against its lower bound from mutual informations at each t.

    At every t, h(W) - lam h(X) - (1-lam) h(Y) is compared with
    I(W; W+sqrt(t)Z) - lam I(X; X+sqrt(t)Z) - (1-lam) I(Y; Y+sqrt(t)Z).
    ``detail["rhs_bound"]`` is 1/2 ln(1 + s2_max / t), which caps every term of
    the right-hand side and so its magnitude.
    """
    lam = _lam(lam)
    ts = [float(t) for t in t_grid]
    if any(b <= a for a, b in zip(ts, ts[1:])) or ts[0] <= 0:
        raise ValueError("t_grid must be increasing and positive")
    w = _vp(p, q, lam, policy)
    hx, hy, hw = entropy(p, policy), entropy(q, policy), entropy(w, policy)
    gap = hw - lam * hx - (1 - lam) * hy
    s2_max = max(variance(p, policy), variance(q, policy), variance(w, policy))
    eq = lam in (0.0, 1.0) or _iid_gaussian(p, q)
    out = []
    for t in ts:
        # I(X; X + sqrt(t) Z) is the signal-scaled information at snr 1/t
        rhs = (mi_signal(w, 1 / t, policy) - lam * mi_signal(p, 1 / t, policy)
               - (1 - lam) * mi_signal(q, 1 / t, policy))
        out.append(SlackReport("epi_limit", ChannelPoint(lam, t), gap - rhs, tol, eq,
                               {"gap": gap, "rhs": rhs,
                                "rhs_bound": 0.5 * math.log1p(s2_max / t)}))
    return out


__all__ = ["SlackReport", "DiscretePMF", "epi_slack", "epi_concave_slack", "lambda_star",
           "theorem1_slack", "deficit_f", "fii_slack", "fii_lambda", "fii_weighted_slack",
           "mmse_ineq_slack", "dj_ineq_slack", "jk_equivalence", "reduction_consistency",
           "combine_discrete", "discrete_epi", "epi_limit_recovery"]
