"""Equalities between information functionals, checked as signed residuals."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .density import DEFAULT_POLICY, Law, as_law, grid_for
from .families import LOG_2PI_E
from .functionals import (additive_channel, cond_var_additive, entropy,
                          fisher_information, mi_noise, mi_signal, mmse_signal)


@dataclass
class Residual:
    name: str
    lhs: float
    rhs: float
    tol: float
    method: dict = field(default_factory=dict)
    inconclusive: bool = False

    @property
    def residual(self):
        return self.lhs - self.rhs

    @property
    def passed(self):
        return abs(self.residual) <= self.tol

    @property
    def status(self):
        if self.passed:
            return "pass"
        return "inconclusive" if self.inconclusive else "fail"

    def to_dict(self):
        d = asdict(self)
        d.update(residual=self.residual, passed=self.passed, status=self.status)
        return d


def _law(p):
    law = as_law(p)
    if not isinstance(law, Law):
        raise TypeError("identity checks need an analytic law, not a bare grid")
    return law


# ------------------------------------------------------------------ complementary
def complementary_general(p, vz=1.0, tol=1e-4, policy=DEFAULT_POLICY):
    """Var(Z) J(X+Z) + J(Z) Var(X|X+Z) = 1 for Z ~ N(0, vz)."""
    if not vz > 0:
        raise ValueError("vz must be positive")
    law = _law(p)
    j = fisher_information(law.smoothed(vz), policy)
    v = cond_var_additive(law, vz, policy)
    return Residual("complementary_general" if vz != 1.0 else "complementary",
                    vz * j + v / vz, 1.0, tol,
                    {"vz": vz, "J": j, "cond_var": v, "grid_n": policy.n})


def complementary(p, tol=1e-4, policy=DEFAULT_POLICY):
    """J(X+Z) + Var(X|X+Z) = 1 for standard Gaussian Z."""
    return complementary_general(p, 1.0, tol, policy)


def total_variance_step(p, tol=1e-4, policy=DEFAULT_POLICY):
    """J(X+Z) = J(Z) - Var{S(Z) | X+Z} with S(Z) = -Z for standard Gaussian Z."""
    law = _law(p)
    j = fisher_information(law.smoothed(1.0), policy)
    # the engine's posterior moments are those of Z = W - X given W
    var_z = additive_channel(law, 1.0, policy).mmse
    return Residual("total_variance_step", j, 1.0 - var_z, tol, {"var_z_given_w": var_z})


def blachman(p, probes, tol=1e-4, policy=DEFAULT_POLICY):
    """Score of X+Z at w equals -E[Z | X+Z = w]; worst residual over the probes."""
    law = _law(p)
    out = law.smoothed(1.0)
    kinks = sorted({c * k + law.shift for c, d in law.terms for k in d.kinks})
    worst, lhs_w, rhs_w = 0.0, 0.0, 0.0
    skipped = []
    for w in probes:
        dens, der = out.pdf(np.array([w]), deriv=True)
        if dens[0] < 1e-200:
            skipped.append(w)
            continue
        lhs = der[0] / dens[0]
        # posterior of Z given X + Z = w is proportional to phi(z) p_X(w - z)
        a, b = -12.0, 12.0
        pts = sorted(w - k for k in kinks if a < w - k < b)

        def prior(z):
            return law.pdf(np.array([w - z]))[0] if law.terms else 0.0

        if law.terms:
            opts = dict(points=pts or None, limit=400, epsrel=1e-11)
            den = integrate.quad(lambda z: math.exp(-0.5 * z * z) * prior(z), a, b,
                                 epsabs=1e-15, **opts)[0]
            # the numerator can vanish by symmetry, so its accuracy is relative to den
            num = integrate.quad(lambda z: z * math.exp(-0.5 * z * z) * prior(z), a, b,
                                 epsabs=1e-12 * den, **opts)[0]
            ez = num / den
        else:
            # Gaussian X: conditional mean of Z is linear in w
            ez = (w - law.shift) / (law.noise + 1.0)
        rhs = -ez
        if abs(lhs - rhs) >= worst:
            worst, lhs_w, rhs_w = abs(lhs - rhs), lhs, rhs
    return Residual("blachman", lhs_w, rhs_w, tol, {"probes": list(map(float, probes)),
                                                    "skipped": skipped})


# ------------------------------------------------------------------ derivatives
def _derivative(f, t, dt):
    d1 = (f(t + dt) - f(t - dt)) / (2 * dt)
    d2 = (f(t + dt / 2) - f(t - dt / 2)) / dt
    return (4 * d2 - d1) / 3


def _step(t):
    dt = max(1e-4, 1e-3 * t)
    if not dt < 0.5 * t:
        raise ValueError(f"derivative step {dt} too large for t={t}")
    return dt


def debruijn_direct(p, t, vz=1.0, tol=1e-5, policy=DEFAULT_POLICY):
    """d/dt h(X + sqrt(t) Z) = J(X + sqrt(t) Z) Var(Z) / 2 for Z ~ N(0, vz)."""
    law = _law(p)
    dt = _step(t)
    laws = {k: law.smoothed(vz * (t + k * dt)) for k in (-1, -0.5, 0.5, 1)}
    grid = grid_for(laws.values(), policy)
    deriv = _derivative(lambda s: entropy(law.smoothed(vz * s), policy, grid), t, dt)
    j = fisher_information(law.smoothed(vz * t), policy)
    return Residual("debruijn_direct", deriv, 0.5 * j * vz, tol,
                    {"t": t, "vz": vz, "dt": dt, "richardson": 1, "grid_n": grid[2]})


def gvs_identity(p, t, tol=1e-5, policy=DEFAULT_POLICY):
    """d/dt I(X; sqrt(t) X + Z) = Var(X | sqrt(t) X + Z) / 2."""
    law = _law(p)
    dt = _step(t)
    laws = [law.smoothed(1.0 / (t + k * dt)) for k in (-1, -0.5, 0.5, 1)]
    grid = grid_for(laws, policy)
    deriv = _derivative(lambda s: mi_signal(law, s, policy, grid), t, dt)
    m = mmse_signal(law, t, policy)
    return Residual("gvs_identity", deriv, 0.5 * m, tol,
                    {"t": t, "dt": dt, "richardson": 1, "grid_n": grid[2]})


# ------------------------------------------------------------------ integral representations
_GL8 = np.polynomial.legendre.leggauss(8)


def _panels(a, b, width):
    k = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, k + 1)
    x, w = _GL8
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def fi_representation(p, sigma2_ref=None, t_max=1e6, tol=1e-3, policy=DEFAULT_POLICY,
                      panel=0.1):
    """h(X) from the integral of J(X + sqrt(t) Z) - 1/(sigma^2 + t) over t.

    The substitution t = s2 (exp(r^2) - 1) absorbs the t^-1/2 blow-up of J
    near zero for densities with jumps and compresses the 1/t^2 tail.
    """
    law = _law(p)
    var = law.var
    s2 = var if sigma2_ref is None else float(sigma2_ref)
    r_max = math.sqrt(math.log1p(t_max / s2))
    r, w = _panels(0.0, r_max, panel)
    t = s2 * np.expm1(r * r)
    dtdr = 2 * s2 * r * np.exp(r * r)
    g = np.array([fisher_information(law.smoothed(ti), policy) for ti in t]) - 1.0 / (s2 + t)
    integral = float(np.dot(w, g * dtdr))
    # tail: reference part exact, remainder D_J in [0, 1/t - 1/(var + t)]
    tail = math.log((s2 + t_max) / (var + t_max))
    tail_bound = 0.5 * math.log1p(var / t_max)
    h_rep = 0.5 * math.log(2 * math.pi * math.e * s2) - 0.5 * (integral + tail)
    h = entropy(law, policy)
    return Residual("fi_representation", h, h_rep, tol,
                    {"sigma2_ref": s2, "t_max": t_max, "nodes": int(t.size),
                     "tail_bound": tail_bound}, inconclusive=tail_bound > tol)


def mmse_representation(p, sigma2_ref=None, t_max=1e6, tol=1e-3, policy=DEFAULT_POLICY,
                        panel=0.5):
    """h(X) from the integral of s2/(1 + t s2) - Var(X | sqrt(t) X + Z) over t.

    Nodes follow t = (exp(u) - 1) / s2, under which the reference term is
    constant in u (t is an SNR, so its natural scale is 1/s2).  Beyond ``t_max`` the reference part is
    integrated exactly and the remaining deficit is extrapolated by
    :func:`_mmse_tail`; the run is inconclusive when that extrapolation is
    uncertain by more than ``tol``.
    """
    law = _law(p)
    var = law.var
    s2 = var if sigma2_ref is None else float(sigma2_ref)
    u_max = math.log1p(t_max * s2)
    u, w = _panels(0.0, u_max, panel)
    t = np.expm1(u) / s2
    dtdu = np.exp(u) / s2
    m = np.array([mmse_signal(law, ti, policy) for ti in t])
    g = s2 / (1 + t * s2) - m
    integral = float(np.dot(w, g * dtdu))
    tail = math.log(s2 / var) - math.log((1 + t_max * s2) / (1 + t_max * var))
    # deficit against the matched Gaussian beyond t_max, from its high-SNR expansion
    remainder, spread = _mmse_tail(law, var, t_max, policy)
    h_rep = 0.5 * math.log(2 * math.pi * math.e * s2) - 0.5 * (integral + tail + remainder)
    h = entropy(law, policy)
    tail_bound = 0.5 * spread
    return Residual("mmse_representation", h, h_rep, tol,
                    {"sigma2_ref": s2, "t_max": t_max, "nodes": int(t.size),
                     "tail_remainder": 0.5 * remainder, "tail_bound": tail_bound},
                    inconclusive=tail_bound > tol)


def _mmse_tail(law, var, t_max, policy):
    """Integral over (t_max, inf) of D(t) = var/(1 + t var) - Var(X | sqrt(t) X + Z).

    At high SNR the posterior resolves features of width 1/sqrt(t), so D has
    an expansion in half-integer powers, a3 t^-3/2 + a4 t^-2 + a5 t^-5/2 + ...
    (a3 vanishes unless the density jumps).  The coefficients are matched at
    t_max/100, t_max/10 and t_max and the expansion is integrated exactly.
    Returns the three-term value and its distance from the two-term value.
    """
    ts = t_max / np.array([100.0, 10.0, 1.0])
    d = np.array([var / (1 + t * var) - mmse_signal(law, t, policy) for t in ts])
    out = []
    for js in ((3, 4, 5), (3, 4)):
        m = np.array([[t ** (-j / 2) for j in js] for t in ts[-len(js):]])
        c = np.linalg.solve(m, d[-len(js):])
        out.append(sum(ci * t_max ** (1 - j / 2) / (j / 2 - 1) for ci, j in zip(c, js)))
    return float(out[0]), abs(out[0] - out[1])


def deficit_coincidence(p, tol=2e-4, policy=DEFAULT_POLICY):
    """D_J(X + Z) = D_V(X | X + Z) for standard Gaussian Z."""
    law = _law(p)
    out = law.smoothed(1.0)
    d_j = fisher_information(out, policy) - 1.0 / out.var
    s2 = law.var
    d_v = s2 / (1.0 + s2) - mmse_signal(law, 1.0, policy)
    return Residual("deficit_coincidence", d_j, d_v, tol, {"sigma2": law.var})


def mi_identity(p, t, tol=1e-8, policy=DEFAULT_POLICY):
    """I(X + sqrt(t) Z; Z) + h(X) = I(X; X + sqrt(t) Z) + h(sqrt(t) Z)."""
    law = _law(p)
    lhs = mi_noise(law, t, policy) + entropy(law, policy)
    rhs = mi_signal(law, 1.0 / t, policy) + 0.5 * (LOG_2PI_E + math.log(t))
    return Residual("mi_identity", lhs, rhs, tol, {"t": t})


__all__ = ["Residual", "complementary", "complementary_general", "total_variance_step",
           "blachman", "debruijn_direct", "gvs_identity", "fi_representation",
           "mmse_representation", "deficit_coincidence", "mi_identity"]
