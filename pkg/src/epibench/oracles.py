"""Independent cross-checks: Gaussian closed forms, named-family entropies and Monte Carlo.

Monte Carlo uses NumPy's PCG64 generator.  Samples are drawn by inverse-CDF
transforms of uniforms (see :meth:`AnalyticDensity.sample`), so every draw is
an exact i.i.d. sample up to floating point.  Sharded runs derive one child
seed per shard with ``SeedSequence(seed).spawn(shards)``; the result depends
on ``(seed, shards)`` only.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .density import DEFAULT_POLICY, GridPolicy, Law
from .families import AnalyticDensity
from .functionals import (entropy, fisher_information, mi_noise, mi_signal, mmse_signal,
                          posterior_mean_curve)


class UnsupportedError(ValueError):
    """The requested (family, quantity) pair has no closed form here."""


@dataclass(frozen=True)
class GaussianOracle:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    @property
    def h(self):
        return 0.5 * math.log(2 * math.pi * math.e * self.sigma2)

    @property
    def J(self):
        return 1.0 / self.sigma2

    def mmse(self, t):
        return self.sigma2 / (1.0 + t * self.sigma2)

    def mi_signal(self, t):
        return 0.5 * math.log1p(t * self.sigma2)

    def mi_noise(self, t):
        return 0.5 * math.log1p(t / self.sigma2)

    @property
    def rho(self):
        """Correlation of X and X + Z for standard Gaussian Z."""
        return math.sqrt(self.sigma2 / (self.sigma2 + 1.0))

    def complementary(self):
        """J(X + Z) + Var(X | X + Z); equal to 1."""
        return 1.0 / (self.sigma2 + 1.0) + self.sigma2 / (self.sigma2 + 1.0)


def closed_form(family, params, quantity, t=None):
    """Exact value of ``quantity`` in {"h", "J", "mmse", "mi_signal", "mi_noise"}.

    ``params`` is a mapping as accepted by :meth:`AnalyticDensity.from_spec`.
    """
    d = AnalyticDensity.from_spec({"family": family, **dict(params)})
    p = d.params
    if family == "gaussian":
        g = GaussianOracle(p[1])
        if quantity in ("h", "J"):
            return getattr(g, quantity)
        if quantity in ("mmse", "mi_signal", "mi_noise"):
            if t is None:
                raise ValueError(f"{quantity} needs t")
            return getattr(g, quantity)(t)
    elif quantity == "h":
        if family == "uniform":
            return math.log(p[1] - p[0])
        if family == "laplace":
            return 1.0 + math.log(2 * p[1])
        if family == "exponential":
            return 1.0 - math.log(p[0])
    elif quantity == "J" and family == "laplace":
        # score is -sign(x - mu)/b almost everywhere
        return 1.0 / p[1] ** 2
    raise UnsupportedError(f"no closed form for {quantity} of {family}")


def quad_entropy(d, smoothing=0.0):
    """h(X + sqrt(smoothing) Z) by adaptive quadrature of the closed-form density.

    Independent of the grid machinery: scipy's QUADPACK on the pointwise
    density, split at the family's kinks.
    """
    s = math.sqrt(smoothing)
    lo, hi = d.interval(1e-16)
    lo, hi = lo - 9 * s, hi + 9 * s

    def f(x):
        p = d.smoothed(np.array([x]), smoothing)[0][0]
        return -p * math.log(p) if p > 0 else 0.0

    pts = [k for k in d.kinks if lo < k < hi] + [lo + (hi - lo) * k / 8 for k in range(1, 8)]
    return integrate.quad(f, lo, hi, points=sorted(set(pts)), limit=1000,
                          epsabs=1e-13, epsrel=1e-12)[0]


def mi_noise_oracle(d, t):
    """I(X + sqrt(t) Z; Z) from two adaptive-quadrature entropies."""
    return quad_entropy(d, t) - quad_entropy(d)


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 1_000_000
    seed: int = 20240601
    shards: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.shards < 1 or self.shards > self.n_samples:
            raise ValueError("shards must lie in [1, n_samples]")


def _shard_sizes(c):
    base, extra = divmod(c.n_samples, c.shards)
    return [base + (i < extra) for i in range(c.shards)]


def _run_shards(fn, c, threads):
    seeds = np.random.SeedSequence(c.seed).spawn(c.shards)
    jobs = list(zip(seeds, _shard_sizes(c)))
    if threads > 1 and c.shards > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda j: fn(np.random.Generator(np.random.PCG64(j[0])), j[1]), jobs))
    else:
        parts = [fn(np.random.Generator(np.random.PCG64(s)), n) for s, n in jobs]
    return np.concatenate(parts)


def _mean_se(v):
    v = np.asarray(v, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf
    return float(v.mean()), se


def mc_entropy(d, c=McConfig(), threads=1):
    """(estimate, standard error) of h(X) as the sample mean of -ln p(X)."""
    return _mean_se(_run_shards(lambda rng, n: -d.logpdf(d.sample(rng, n)), c, threads))


def mc_mmse(d, t, c=McConfig(), threads=1, policy=DEFAULT_POLICY):
    """(estimate, standard error) of Var(X | sqrt(t) X + Z).

    Pairs (X, Y = sqrt(t) X + Z) are sampled and X is estimated by the
    quadrature posterior mean, interpolated on the engine's output grid.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    y_grid, m_grid = posterior_mean_curve(Law.of(d), t, policy)

    def shard(rng, n):
        x = d.sample(rng, n)
        y = math.sqrt(t) * x + rng.standard_normal(n)
        return (x - np.interp(y, y_grid, m_grid)) ** 2

    return _mean_se(_run_shards(shard, c, threads))


def in_band(value, estimate, se, k=3.0, floor=1e-12):
    """Whether ``value`` lies within ``k`` standard errors of ``estimate``."""
    return abs(value - estimate) <= max(k * se, floor)


# ------------------------------------------------------------------ convergence
_QUANTITIES = {
    "entropy": lambda d, pol: entropy(d, pol),
    "fisher_information": lambda d, pol: fisher_information(d, pol),
    "mmse": lambda d, pol: mmse_signal(d, 1.0, pol),
    "mi_noise": lambda d, pol: mi_noise(d, 1.0, pol),
    "mi_signal": lambda d, pol: mi_signal(d, 1.0, pol),
}


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    value: float
    delta: float


@dataclass(frozen=True)
class ConvergenceStudy:
    quantity: str
    rows: tuple
    tol: float

    @property
    def converged(self):
        d = [r.delta for r in self.rows[1:]]
        return d[-1] <= self.tol

    @property
    def monotone(self):
        """Deltas shrink, or have already hit the floor ``tol``/100."""
        d = [r.delta for r in self.rows[1:]]
        return all(b <= a or b <= self.tol * 1e-2 for a, b in zip(d, d[1:]))

    @property
    def flagged(self):
        return not (self.converged and self.monotone)


def convergence_study(quantity, density, sizes, tol=1e-5, base=DEFAULT_POLICY):
    """Re-evaluate ``quantity`` with the base grid size set to each entry of ``sizes``.

    ``quantity`` is a name from the built-in table or a callable ``f(density, policy)``.
    Grids only start at the requested size; the policy still refines them to
    resolve narrow Gaussian components.
    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 3 or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("need at least three increasing grid sizes")
    fn = _QUANTITIES[quantity] if isinstance(quantity, str) else quantity
    name = quantity if isinstance(quantity, str) else getattr(quantity, "__name__", "custom")
    rows, prev = [], None
    for n in sizes:
        pol = GridPolicy(n=n, mass_tol=base.mass_tol, floor_eps=base.floor_eps,
                         max_n=max(base.max_n, n * base.raw_factor), raw_factor=base.raw_factor,
                         res_factor=base.res_factor)
        v = float(fn(density, pol))
        rows.append(ConvergenceRow(n, v, math.nan if prev is None else abs(v - prev)))
        prev = v
    return ConvergenceStudy(name, tuple(rows), tol)


__all__ = ["GaussianOracle", "UnsupportedError", "closed_form", "quad_entropy", "mi_noise_oracle", "McConfig", "mc_entropy",
           "mc_mmse", "in_band", "convergence_study", "ConvergenceStudy", "ConvergenceRow"]
