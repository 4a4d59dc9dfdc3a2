"""Scalar information functionals of one-dimensional densities.

All quantities are in nats.  Inputs may be a :class:`~epibench.families.AnalyticDensity`,
a :class:`~epibench.density.Law` or a :class:`~epibench.density.GridDensity`;
the first two are discretized with the given :class:`GridPolicy`.

Conditional variances use one engine for the additive channel
``W = X + sqrt(s2) Z``: the posterior moments of ``D = W - X`` are formed for
every output ``w`` by quadrature over the prior grid, and the MMSE is the
output-weighted average of the posterior variance.  The signal-scaled channel
``sqrt(t) X + Z`` is the same channel with ``s2 = 1/t``, because dividing the
observation by ``sqrt(t)`` loses no information.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .density import (DEFAULT_POLICY, GridDensity, Law, ResolutionError, ScoreUndefinedError,
                      _pow2_at_least, as_law, discretize, gaussian_smooth, moments,
                      trapezoid_weights)
from .families import LOG_2PI_E

# posterior kernels are cut at this many noise standard deviations
KERNEL_SPAN = 9.5
# largest prior-points x output-points product evaluated directly
DIRECT_BUDGET = 2e6


@dataclass(frozen=True)
class Posterior:
    y: float
    density: GridDensity
    mean: float
    variance: float


@dataclass(frozen=True)
class DeficitPoint:
    d_h: float
    d_j: float
    d_v: float
    sigma2_ref: float


def _cached(fn):
    """Memoize on hashable (law) inputs; grids pass straight through."""
    cached = functools.lru_cache(maxsize=4096)(fn)

    @functools.wraps(fn)
    def wrapper(p, *args, **kwargs):
        p = as_law(p)
        if isinstance(p, GridDensity):
            return fn(p, *args, **kwargs)
        return cached(p, *args, **kwargs)

    wrapper.cache_clear = cached.cache_clear
    return wrapper


def _masked(g, floor):
    return g.values >= floor


@_cached
def entropy(p, policy=DEFAULT_POLICY, grid=None):
    """Differential entropy by the trapezoid rule; points below the floor contribute 0."""
    g = discretize(p, policy, grid)
    v = g.values
    ok = _masked(g, policy.floor_eps)
    f = np.zeros_like(v)
    f[ok] = -v[ok] * np.log(v[ok])
    return g.trapz(f)


def entropy_power(p, policy=DEFAULT_POLICY):
    return math.exp(2.0 * entropy(p, policy))


@_cached
def fisher_information(p, policy=DEFAULT_POLICY, extrapolate=False, grid=None):
    """Fisher information of the location family, E[(p'/p)^2].

    Densities with a jump have infinite information and always raise
    :class:`ScoreUndefinedError`.  Densities with a kink (Laplace) raise too
    unless ``extrapolate`` is set, in which case J is extrapolated from a
    ladder of slightly smoothed versions.
    """
    if isinstance(p, Law) and not p.smooth:
        if extrapolate and p.order == 0:
            return _extrapolated_fisher(p, policy)
        raise ScoreUndefinedError(f"{p.label}: Fisher information undefined without smoothing")
    g = discretize(p, policy, grid)
    if not g.smooth:
        raise ScoreUndefinedError(f"{g.label}: Fisher information undefined without smoothing")
    der = g.deriv if g.deriv is not None else np.gradient(g.values, g.step, edge_order=2)
    ok = _masked(g, policy.floor_eps)
    f = np.zeros_like(g.values)
    f[ok] = der[ok] ** 2 / g.values[ok]
    return g.trapz(f)


def _extrapolated_fisher(law, policy, rungs=5):
    # J(X + sZ) = J0 + a1 s + a2 s^2 + ... near s = 0 for a kinked density
    s0 = 0.04 * math.sqrt(law.var)
    s = s0 / 2.0 ** np.arange(rungs)
    j = np.array([fisher_information(law.smoothed(si * si), policy) for si in s])
    coef = np.polyfit(s, j, rungs - 1)
    return float(coef[-1])


# ---------------------------------------------------------------- posteriors
@dataclass(frozen=True)
class AdditiveChannel:
    """Posterior summaries for W = X + sqrt(s2) Z on an output grid ``w``."""

    s2: float
    w: np.ndarray
    hw: float
    out_density: np.ndarray
    d_mean: np.ndarray   # E[W - X | W = w]
    d_var: np.ndarray    # Var[W - X | W = w] = Var[X | W = w]
    method: str
    prior_n: int

    @property
    def mmse(self):
        f = self.out_density * self.d_var
        return self.hw * (f.sum() - 0.5 * (f[0] + f[-1]))

    def x_mean(self):
        return self.w - self.d_mean


def _finish(w, hw, z, m1, m2, s2, method, n):
    ok = z > 1e-14 * z.max()
    mean = np.zeros_like(z)
    var = np.zeros_like(z)
    mean[ok] = m1[ok] / z[ok]
    var[ok] = np.maximum(m2[ok] / z[ok] - mean[ok] ** 2, 0.0)
    zz = np.where(ok, z, 0.0)
    return AdditiveChannel(s2, w, hw, zz, mean, var, method, n)


def _direct(g, s2, n_w):
    s = math.sqrt(s2)
    x = g.x
    pw = g.values * trapezoid_weights(g.n, g.step) / math.sqrt(2 * math.pi * s2)
    w = np.linspace(g.lo - KERNEL_SPAN * s, g.hi + KERNEL_SPAN * s, n_w)
    z, m1, m2 = (np.empty(n_w) for _ in range(3))
    chunk = max(1, int(4e6 // g.n))
    for i in range(0, n_w, chunk):
        d = w[i:i + chunk, None] - x[None, :]
        k = np.exp(-0.5 * d * d / s2) * pw
        z[i:i + chunk] = k.sum(axis=1)
        kd = k * d
        m1[i:i + chunk] = kd.sum(axis=1)
        m2[i:i + chunk] = (kd * d).sum(axis=1)
    return _finish(w, w[1] - w[0], z, m1, m2, s2, "direct", g.n)


def _fft(g, s2):
    s = math.sqrt(s2)
    h = g.step
    m = int(math.ceil(KERNEL_SPAN * s / h))
    u = h * np.arange(-m, m + 1)
    k0 = np.exp(-0.5 * u * u / s2) / math.sqrt(2 * math.pi * s2)
    pw = g.values * trapezoid_weights(g.n, h)
    z = signal.fftconvolve(pw, k0)
    m1 = signal.fftconvolve(pw, u * k0)
    m2 = signal.fftconvolve(pw, u * u * k0)
    w = g.lo - m * h + h * np.arange(z.size)
    return _finish(w, h, z, m1, m2, s2, "fft", g.n)


@_cached
def additive_channel(p, s2, policy=DEFAULT_POLICY):
    """Posterior moments for the additive Gaussian channel of noise variance ``s2``."""
    if not s2 > 0:
        raise ValueError("noise variance must be positive")
    s = math.sqrt(s2)
    g = discretize(p, policy)
    span = g.hi - g.lo
    n_w = int(math.ceil((span + 2 * KERNEL_SPAN * s) / (s / 8))) + 1
    # the FFT kernel spans the noise at prior resolution; for wide noise that
    # is far more work than evaluating the few output points directly
    fft_len = g.n + 2 * KERNEL_SPAN * s / g.step
    if g.n * n_w <= max(DIRECT_BUDGET, 20 * fft_len):
        return _direct(g, s2, n_w)
    if g.step > s / 4 and not isinstance(p, GridDensity):
        n = _pow2_at_least(span / (s / 4) + 1)
        if n > policy.max_n:
            raise ResolutionError(f"{g.label}: posterior at noise {s2:g} needs {n} points")
        g = discretize(p, policy, grid=(g.lo, g.hi, n))
    return _fft(g, s2)


def mmse_signal(p, t, policy=DEFAULT_POLICY):
    """Var(X | sqrt(t) X + Z)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return moments(discretize(p, policy))[1]
    return additive_channel(p, 1.0 / t, policy).mmse


def cond_var_additive(p, t, policy=DEFAULT_POLICY):
    """Var(X | X + sqrt(t) Z)."""
    if not t > 0:
        raise ValueError("t must be positive; conditioning on X itself is outside the contract")
    return additive_channel(p, t, policy).mmse


def posterior_mean_curve(p, t, policy=DEFAULT_POLICY):
    """(y, E[X | sqrt(t) X + Z = y]) on the engine's output grid."""
    ch = additive_channel(p, 1.0 / t, policy)
    ok = ch.out_density > 0
    return math.sqrt(t) * ch.w[ok], ch.x_mean()[ok]


def posterior(p, t, y, policy=DEFAULT_POLICY):
    """Posterior of X given sqrt(t) X + Z = y, on the prior's grid."""
    if not t > 0:
        raise ValueError("t must be positive")
    g = discretize(p, policy)
    x = g.x
    ok = g.values > 0
    logw = np.full(g.n, -np.inf)
    logw[ok] = np.log(g.values[ok]) - 0.5 * (y - math.sqrt(t) * x[ok]) ** 2
    top = logw.max()
    if not np.isfinite(top) or top < math.log(policy.floor_eps):
        raise ValueError(f"observation y={y} lies outside the support of {g.label}")
    wts = np.exp(logw - top)
    wts /= g.trapz(wts)
    dens = GridDensity(g.lo, g.hi, wts, None, False, f"posterior({g.label}|y={y:g})")
    mean, var = moments(dens)
    return Posterior(float(y), dens, mean, var)


# ---------------------------------------------------------------- informations
def mi_noise(p, t, policy=DEFAULT_POLICY):
    """I(X + sqrt(t) Z; Z) = h(X + sqrt(t) Z) - h(X)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    return entropy(gaussian_smooth(p, t, policy), policy) - entropy(p, policy)


def mi_signal(p, t, policy=DEFAULT_POLICY, grid=None):
    """I(X; sqrt(t) X + Z) = h(X + Z/sqrt(t)) + log(t)/2 - log(2 pi e)/2."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    return entropy(gaussian_smooth(p, 1.0 / t, policy), policy, grid) + 0.5 * math.log(t) - 0.5 * LOG_2PI_E


def variance(p, policy=DEFAULT_POLICY):
    p = as_law(p)
    if isinstance(p, Law):
        return p.var
    return moments(p)[1]


def deficits(p, t, sigma2_ref=None, policy=DEFAULT_POLICY, extrapolate=False):
    """Non-Gaussianness of h, J and the MMSE against a Gaussian of variance ``sigma2_ref``.

    ``d_j`` is ``inf`` for densities with a jump, whose Fisher information is infinite.
    """
    s2 = variance(p, policy) if sigma2_ref is None else float(sigma2_ref)
    if not s2 > 0:
        raise ValueError("sigma2_ref must be positive")
    d_h = 0.5 * math.log(2 * math.pi * math.e * s2) - entropy(p, policy)
    law = as_law(p)
    if isinstance(law, Law) and law.order < 0:
        d_j = math.inf
    else:
        d_j = fisher_information(p, policy, extrapolate) - 1.0 / s2
    d_v = s2 / (t * s2 + 1.0) - mmse_signal(p, t, policy)
    return DeficitPoint(d_h, d_j, d_v, s2)
