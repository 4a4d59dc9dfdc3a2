"""Densities as exact laws and as sampled grids.

A :class:`Law` is the distribution of ``shift + sum_i c_i X_i + sqrt(noise) Z``
for independent family members ``X_i``.  Scaling, independent sums, Gaussian
smoothing and the variance-preserving combination are exact operations on
laws.  :func:`discretize` turns a law into a :class:`GridDensity`, which is
what every quadrature in the package consumes.

Evaluation strategy, by law shape:

* at most one non-Gaussian term: closed form (mixtures are expanded),
* two raw terms and no noise: piecewise Gauss-Legendre over the first term,
  split at every kink so each panel integrand is smooth,
* anything with Gaussian noise and two or more terms: inverse FFT of the
  closed-form characteristic function on the output grid.

Grids can also be convolved directly (zero-padded FFT), which is the general
path for densities that did not come from a law.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal, special

from .families import AnalyticDensity


class ScoreUndefinedError(ValueError):
    """The density has a jump or kink, so p'/p (and Fisher information) is undefined."""


class ResolutionError(RuntimeError):
    """A grid would exceed the configured maximum size."""


@dataclass(frozen=True)
class GridPolicy:
    n: int = 4096
    mass_tol: float = 1e-12
    floor_eps: float = 1e-300
    max_n: int = 2 ** 20
    # raw laws with jumps or kinks get raw_factor * n points
    raw_factor: int = 4
    # grid step is kept below res_factor * (smallest Gaussian std in the law)
    res_factor: float = 0.3

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise ValueError("grid size n must be a power of two >= 64")
        if not 0 < self.mass_tol < 1e-3:
            raise ValueError("mass_tol must lie in (0, 1e-3)")


DEFAULT_POLICY = GridPolicy()


@dataclass(frozen=True)
class ChannelPoint:
    lam: float
    t: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.t < 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")

    @property
    def alpha(self):
        return math.sqrt(self.t * self.lam)

    @property
    def beta(self):
        return math.sqrt(self.t * (1.0 - self.lam))


def _pow2_at_least(k):
    return 1 << max(0, int(math.ceil(math.log2(max(k, 1)))))


# Gauss-Legendre rule used for the raw two-term convolution integral
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class Law:
    """Distribution of ``shift + sum(c * X) + sqrt(noise) * Z``."""

    terms: tuple = ()
    shift: float = 0.0
    noise: float = 0.0

    @classmethod
    def of(cls, d):
        if isinstance(d, Law):
            return d
        if not isinstance(d, AnalyticDensity):
            raise TypeError(f"cannot make a law from {type(d).__name__}")
        if d.family == "gaussian":
            return cls((), d.params[0], d.params[1])
        return cls(((1.0, d),))

    # algebra ----------------------------------------------------------
    def scaled(self, c):
        if c == 0:
            raise ValueError("scaling by zero gives a degenerate distribution")
        return Law(tuple((c * a, d) for a, d in self.terms), c * self.shift, c * c * self.noise)

    def plus(self, other):
        return Law(self.terms + other.terms, self.shift + other.shift, self.noise + other.noise)

    def smoothed(self, t):
        if t < 0:
            raise ValueError("smoothing variance must be nonnegative")
        return replace(self, noise=self.noise + t)

    def shifted(self, m):
        return replace(self, shift=self.shift + m)

    # descriptors ------------------------------------------------------
    @property
    def mean(self):
        return self.shift + sum(c * d.mean for c, d in self.terms)

    @property
    def var(self):
        return self.noise + sum(c * c * d.var for c, d in self.terms)

    @property
    def is_gaussian(self):
        return not self.terms

    @property
    def order(self):
        """Number of continuous derivatives (-1 means a jump)."""
        if self.noise > 0 or not self.terms or any(d.order == math.inf for _, d in self.terms):
            return math.inf
        return sum(d.order for _, d in self.terms) + 2 * (len(self.terms) - 1)

    @property
    def smooth(self):
        return self.order >= 1

    @property
    def gaussian_floor(self):
        """Smallest Gaussian variance present in every mixture component."""
        v = self.noise
        for c, d in self.terms:
            if d.family == "mixture":
                v += c * c * min(d.params[2])
        return v

    @property
    def label(self):
        parts = [f"{c:.6g}*{d.label}" for c, d in self.terms]
        if self.noise:
            parts.append(f"N({self.shift:.6g},{self.noise:.6g})")
        elif self.shift:
            parts.append(f"{self.shift:.6g}")
        return " + ".join(parts) if parts else "degenerate"

    def interval(self, mass):
        k = len(self.terms) + (1 if self.noise > 0 else 0)
        each = mass / max(k, 1)
        lo = hi = self.shift
        for c, d in self.terms:
            a, b = d.interval(each)
            lo += min(c * a, c * b)
            hi += max(c * a, c * b)
        if self.noise > 0:
            z = -special.ndtri(0.5 * each) * math.sqrt(self.noise)
            lo -= z
            hi += z
        return lo, hi

    def _needs_fft(self):
        plain = [d for _, d in self.terms if d.family != "mixture"]
        return len(plain) >= 2 and self.gaussian_floor > 0

    def _expanded(self):
        """Mixture terms expanded: list of (weight, plain_terms, shift, noise)."""
        out = [(1.0, (), self.shift, self.noise)]
        for c, d in self.terms:
            if d.family == "mixture":
                out = [(w * wk, tt, s + c * m, v + c * c * vk)
                       for w, tt, s, v in out for wk, m, vk in zip(*d.params)]
            else:
                out = [(w, tt + ((c, d),), s, v) for w, tt, s, v in out]
        return out

    # pointwise evaluation ---------------------------------------------
    def pdf(self, x, deriv=False):
        """Density (and derivative if ``deriv``) at arbitrary points."""
        x = np.asarray(x, dtype=float)
        if not self.terms and self.noise <= 0:
            raise ValueError("degenerate law has no density")
        if self._needs_fft():
            raise NotImplementedError("law only supports evaluation on uniform grids")
        dens = np.zeros_like(x)
        der = np.zeros_like(x)
        for w, tt, s, v in self._expanded():
            if len(tt) == 0:
                d = x - s
                g = w * np.exp(-0.5 * d * d / v) / math.sqrt(2 * math.pi * v)
                dens += g
                der -= d / v * g
            elif len(tt) == 1:
                (c, dist), = tt
                p, dp = dist.smoothed((x - s) / c, v / (c * c))
                dens += w * p / abs(c)
                der += w * dp / (c * abs(c))
            elif len(tt) == 2 and v == 0:
                if deriv:
                    raise ScoreUndefinedError("no analytic derivative for a raw two-term sum")
                dens += w * _raw_pair_pdf(x - s, tt)
            else:
                raise NotImplementedError("raw sums of more than two non-Gaussian terms")
        return (dens, der) if deriv else dens

    def on_grid(self, lo, h, n):
        """Density and derivative on ``lo + h * arange(n)``; derivative None if unavailable."""
        x = lo + h * np.arange(n)
        if self._needs_fft():
            return _cf_on_grid(self, lo, h, n)
        try:
            dens, der = self.pdf(x, deriv=True)
        except ScoreUndefinedError:
            return self.pdf(x), None
        return dens, (der if self.smooth else None)

    def cf(self, omega):
        out = np.exp(1j * omega * self.shift - 0.5 * self.noise * omega * omega)
        for c, d in self.terms:
            out = out * d.cf(c * omega)
        return out


def _cf_on_grid(law, lo, h, n):
    omega = 2 * math.pi * np.fft.fftfreq(n, d=h)
    phi = law.cf(omega) * np.exp(-1j * omega * lo)
    dens = np.fft.fft(phi).real / (n * h)
    der = np.fft.fft(-1j * omega * phi).real / (n * h)
    return dens, der


def _panel_points(c, d, trunc_mass=1e-20):
    """Breakpoints (in the scaled variable c*X) splitting X's support into smooth panels."""
    lo, hi = d.interval(trunc_mass)
    pts = set(d.kinks) | {lo, hi}
    if d.family in ("laplace", "exponential"):
        step = 6.0 * d.tail_scale
        k0 = d.kinks[0]
        k = 1
        while k0 + k * step < hi or k0 - k * step > lo:
            for p in (k0 + k * step, k0 - k * step):
                if lo < p < hi:
                    pts.add(p)
            k += 1
    return np.array(sorted(c * p for p in pts))


def _raw_pair_pdf(x, terms, chunk=2048):
    """Density of c1*X1 + c2*X2 at x, integrating over X1 panel by panel."""
    # integrate over the term with the most compact support
    terms = sorted(terms, key=lambda cd: 0 if cd[1].family == "uniform" else 1)
    (c1, d1), (c2, d2) = terms
    own = _panel_points(c1, d1)  # in units of y = c1 * X1
    lo, hi = own[0], own[-1]
    other = _panel_points(c2, d2)  # kinks of the second term, in its own scaled units
    shape = x.shape
    x = x.ravel()
    out = np.empty_like(x)
    for i in range(0, x.size, chunk):
        xs = x[i:i + chunk]
        # breakpoints in y: own panels, plus y where x - y hits a kink of term 2
        mapped = xs[:, None] - other[None, :]
        bp = np.concatenate([np.broadcast_to(own, (xs.size, own.size)), np.clip(mapped, lo, hi)], axis=1)
        bp.sort(axis=1)
        a, b = bp[:, :-1], bp[:, 1:]
        half = 0.5 * (b - a)
        y = (a + b)[..., None] * 0.5 + half[..., None] * _GL_X  # (m, pieces, nodes)
        f1 = d1.pdf(y / c1) / abs(c1)
        f2 = d2.pdf((xs[:, None, None] - y) / c2) / abs(c2)
        out[i:i + chunk] = np.einsum("mpk,k,mp->m", f1 * f2, _GL_W, half)
    return out.reshape(shape)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A normalized density sampled on a uniform grid of ``n`` points over [lo, hi]."""

    lo: float
    hi: float
    values: np.ndarray
    deriv: np.ndarray | None = None
    smooth: bool = True
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("values must be a 1-d array")
        if np.any(v < 0):
            raise ValueError("density values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.deriv is not None:
            d = np.asarray(self.deriv, dtype=float)
            d.setflags(write=False)
            object.__setattr__(self, "deriv", d)

    @property
    def n(self):
        return self.values.size

    @property
    def step(self):
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def x(self):
        return self.lo + self.step * np.arange(self.n)

    def trapz(self, f):
        """Trapezoid rule of the sampled function ``f`` over this grid."""
        f = np.asarray(f, dtype=float)
        return self.step * (f.sum() - 0.5 * (f[0] + f[-1]))

    @property
    def mass(self):
        return self.trapz(self.values)


def trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def grid_for(laws, policy=DEFAULT_POLICY):
    """A single (lo, hi, n) grid adequate for every law in ``laws``.

    Finite-difference stencils evaluate all their points on one grid so the
    quadrature error varies smoothly with the parameter being differentiated.
    """
    specs = [_grid_spec(Law.of(law), policy) for law in laws]
    lo = min(s[0] for s in specs)
    hi = max(s[1] for s in specs)
    h = min((s[1] - s[0]) / (s[2] - 1) for s in specs)
    n = _pow2_at_least((hi - lo) / h + 1)
    if n > policy.max_n:
        raise ResolutionError(f"grid of {n} points exceeds max_n={policy.max_n}")
    return lo, hi, n


def _grid_spec(law, policy):
    if law.is_gaussian and law.noise <= 0:
        raise ValueError("degenerate law has no density")
    tol = policy.mass_tol * (1e-4 if law._needs_fft() else 1.0)
    lo, hi = law.interval(tol)
    n = policy.n
    vfloor = law.gaussian_floor
    if vfloor == 0 and not law.is_gaussian:
        n *= policy.raw_factor
    if vfloor > 0:
        hmax = policy.res_factor * math.sqrt(vfloor)
        n = max(n, _pow2_at_least((hi - lo) / hmax + 1))
    if n > policy.max_n:
        raise ResolutionError(f"{law.label}: needs {n} grid points, max_n={policy.max_n}")
    return lo, hi, n


def discretize(d, policy=DEFAULT_POLICY, grid=None):
    """Sample a law (or family member) onto a uniform grid and renormalize it.

    ``grid`` optionally pins ``(lo, hi, n)``; otherwise the support covers all
    but ``policy.mass_tol`` of the mass and the step resolves the law's
    narrowest Gaussian component.
    """
    if isinstance(d, GridDensity):
        return d
    law = Law.of(d)
    return _discretize_cached(law, policy, grid)


@functools.lru_cache(maxsize=48)
def _discretize_cached(law, policy, grid):
    lo, hi, n = grid if grid is not None else _grid_spec(law, policy)
    h = (hi - lo) / (n - 1)
    dens, der = law.on_grid(lo, h, n)
    dens = np.maximum(dens, 0.0)
    mass = h * (dens.sum() - 0.5 * (dens[0] + dens[-1]))
    if not mass > 0:
        raise ValueError(f"{law.label}: no mass on grid [{lo}, {hi}]")
    dens = dens / mass
    if der is not None:
        der = der / mass
    return GridDensity(lo, hi, dens, der, smooth=law.smooth, label=law.label,
                       meta={"n": n, "step": h, "raw_mass": mass, "law": law})


def as_law(d):
    return d if isinstance(d, (Law, GridDensity)) else Law.of(d)


def moments(p):
    """Trapezoid-rule mean and variance of a grid density."""
    x = p.x
    m = p.trapz(x * p.values)
    return m, p.trapz((x - m) ** 2 * p.values)


def scale(p, c):
    """Density of ``c X``."""
    if c == 0:
        raise ValueError("scaling by zero gives a degenerate distribution")
    if c == 1:
        return p
    if isinstance(p, GridDensity):
        vals = p.values / abs(c)
        der = None if p.deriv is None else p.deriv / (c * abs(c))
        lo, hi = c * p.lo, c * p.hi
        if c < 0:
            vals = vals[::-1]
            der = None if der is None else der[::-1]
            lo, hi = hi, lo
        return GridDensity(lo, hi, vals, der, p.smooth, f"{c:g}*{p.label}")
    return as_law(p).scaled(c)


def _resample(p, h):
    n = int(round((p.hi - p.lo) / h)) + 1
    x = p.lo + h * np.arange(n)
    vals = np.interp(x, p.x, p.values, right=0.0)
    return GridDensity(p.lo, x[-1], vals, None, p.smooth, p.label)


def convolve(p, q, policy=DEFAULT_POLICY):
    """Density of ``X + Y`` for independent X ~ p, Y ~ q.

    Laws combine exactly.  Grids are convolved by zero-padded FFT with
    trapezoid end weights; the output is padded with zeros to a power-of-two
    length.
    """
    if not isinstance(p, GridDensity) and not isinstance(q, GridDensity):
        return as_law(p).plus(as_law(q))
    if not isinstance(p, GridDensity):
        p, q = q, p
    if not isinstance(q, GridDensity):
        law = as_law(q)
        lo, hi = law.interval(policy.mass_tol)
        n = max(2, int(math.ceil((hi - lo) / p.step)) + 1)
        q = discretize(law, policy, grid=(lo, lo + p.step * (n - 1), n))
    h = min(p.step, q.step)
    if abs(p.step - q.step) > 1e-12 * h:
        p = p if p.step == h else _resample(p, h)
        q = q if q.step == h else _resample(q, h)
    length = p.n + q.n - 1
    n_out = _pow2_at_least(length)
    if n_out > policy.max_n:
        raise ResolutionError(f"convolution needs {n_out} points, max_n={policy.max_n}")
    pw = p.values * trapezoid_weights(p.n, h)
    qw = q.values * trapezoid_weights(q.n, h) / h
    vals = np.zeros(n_out)
    vals[:length] = np.maximum(signal.fftconvolve(pw, qw), 0.0)
    der = None
    src = q if q.deriv is not None else (p if p.deriv is not None else None)
    if src is not None:
        other = p if src is q else q
        a = other.values * trapezoid_weights(other.n, h)
        b = src.deriv * trapezoid_weights(src.n, h) / h
        der = np.zeros(n_out)
        der[:length] = signal.fftconvolve(a, b)
    lo = p.lo + q.lo
    return GridDensity(lo, lo + h * (n_out - 1), vals, der, p.smooth or q.smooth,
                       f"({p.label})*({q.label})")


def gaussian_smooth(p, t, policy=DEFAULT_POLICY):
    """Density of ``X + sqrt(t) Z`` with Z standard normal."""
    if t < 0:
        raise ValueError("smoothing variance must be nonnegative")
    if t == 0:
        return p
    if not isinstance(p, GridDensity):
        return as_law(p).smoothed(t)
    h = p.step
    z = -special.ndtri(0.5 * policy.mass_tol) * math.sqrt(t)
    m = int(math.ceil(z / h))
    u = h * np.arange(-m, m + 1)
    k = np.exp(-0.5 * u * u / t)
    kd = -u / t * k
    k_mass = k.sum() * h
    kern = GridDensity(-m * h, m * h, k / k_mass, kd / k_mass, True, f"N(0,{t:g})")
    out = convolve(p, kern, policy)
    return replace(out, label=f"{p.label}+N(0,{t:g})")


def combine_vp(p, q, lam, policy=DEFAULT_POLICY):
    """Density of ``sqrt(lam) X + sqrt(1 - lam) Y``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if lam == 1.0:
        return p
    if lam == 0.0:
        return q
    return convolve(scale(p, math.sqrt(lam)), scale(q, math.sqrt(1.0 - lam)), policy)


def score(p, policy=DEFAULT_POLICY):
    """Score p'/p on the grid; NaN where the density is below the floor."""
    g = discretize(p, policy)
    if not g.smooth:
        raise ScoreUndefinedError(f"{g.label}: density has a jump or kink; smooth it first")
    der = g.deriv if g.deriv is not None else np.gradient(g.values, g.step)
    out = np.full(g.n, np.nan)
    ok = g.values >= policy.floor_eps
    out[ok] = der[ok] / g.values[ok]
    return out
