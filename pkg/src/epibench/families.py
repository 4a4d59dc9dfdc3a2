"""Closed-form one-dimensional density families.

Every family here is closed under additive Gaussian noise in the sense that
the density of ``X + sqrt(v) Z`` (and its derivative) has an elementary
expression.  That is what lets the rest of the package evaluate smoothed
densities pointwise to near machine precision instead of convolving grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

FAMILIES = ("gaussian", "uniform", "laplace", "exponential", "mixture")

SQRT2 = math.sqrt(2.0)
LOG_2PI_E = math.log(2.0 * math.pi * math.e)

# smoothness class of the raw density: -1 jump, 0 kink, inf smooth
_ORDER = {"gaussian": math.inf, "mixture": math.inf, "laplace": 0, "uniform": -1, "exponential": -1}


def _norm_pdf(x, var):
    return np.exp(-0.5 * x * x / var) / math.sqrt(2.0 * math.pi * var)


def _edge_term(u, s, inv_b):
    """exp(s^2/(2b^2) - u/b) * Phi(u/s - s/b), evaluated without overflow."""
    u = np.asarray(u, dtype=float)
    z = u / s - s * inv_b
    out = np.empty_like(u)
    neg = z < 0
    # for z < 0 the exponent collapses to -u^2/(2 s^2)
    out[neg] = 0.5 * special.erfcx(-z[neg] / SQRT2) * np.exp(-0.5 * (u[neg] / s) ** 2)
    pos = ~neg
    out[pos] = np.exp(0.5 * (s * inv_b) ** 2 - u[pos] * inv_b) * special.ndtr(z[pos])
    return out


@dataclass(frozen=True)
class AnalyticDensity:
    """A named density family with its parameters.

    Use the constructors (:meth:`gaussian`, :meth:`uniform`, ...) rather than
    building the tuple of parameters by hand.
    """

    family: str
    params: tuple

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        p = self.params
        if self.family == "gaussian":
            if not p[1] > 0:
                raise ValueError("gaussian variance must be positive")
        elif self.family == "uniform":
            if not p[1] > p[0]:
                raise ValueError("uniform needs a < b")
        elif self.family == "laplace":
            if not p[1] > 0:
                raise ValueError("laplace scale must be positive")
        elif self.family == "exponential":
            if not p[0] > 0:
                raise ValueError("exponential rate must be positive")
        else:
            w, m, v = p
            if not (len(w) == len(m) == len(v)) or len(w) == 0:
                raise ValueError("mixture weights, means and variances must have equal length")
            if any(x <= 0 for x in w) or abs(sum(w) - 1.0) > 1e-12:
                raise ValueError("mixture weights must be positive and sum to 1")
            if any(x <= 0 for x in v):
                raise ValueError("mixture variances must be positive")

    # constructors -----------------------------------------------------
    @classmethod
    def gaussian(cls, mean=0.0, var=1.0):
        return cls("gaussian", (float(mean), float(var)))

    @classmethod
    def uniform(cls, a=0.0, b=1.0):
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def laplace(cls, loc=0.0, scale=1.0):
        return cls("laplace", (float(loc), float(scale)))

    @classmethod
    def exponential(cls, rate=1.0, loc=0.0):
        return cls("exponential", (float(rate), float(loc)))

    @classmethod
    def mixture(cls, weights, means, variances):
        return cls("mixture", (tuple(map(float, weights)), tuple(map(float, means)),
                               tuple(map(float, variances))))

    @classmethod
    def from_spec(cls, spec):
        """Build from a mapping such as ``{"family": "laplace", "scale": 2}``."""
        spec = dict(spec)
        fam = spec.pop("family", None)
        spec.pop("name", None)
        builders = {"gaussian": cls.gaussian, "uniform": cls.uniform, "laplace": cls.laplace,
                    "exponential": cls.exponential, "mixture": cls.mixture}
        if fam not in builders:
            raise ValueError(f"unknown family {fam!r}")
        try:
            return builders[fam](**spec)
        except TypeError as exc:
            raise ValueError(f"bad parameters for {fam}: {exc}") from None

    def to_spec(self):
        names = {"gaussian": ("mean", "var"), "uniform": ("a", "b"), "laplace": ("loc", "scale"),
                 "exponential": ("rate", "loc"), "mixture": ("weights", "means", "variances")}
        out = {"family": self.family}
        for k, v in zip(names[self.family], self.params):
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    @property
    def label(self):
        if self.family == "mixture":
            return f"mixture{len(self.params[0])}"
        return f"{self.family}({','.join(f'{x:g}' for x in self.params)})"

    # moments ----------------------------------------------------------
    @property
    def mean(self):
        f, p = self.family, self.params
        if f == "gaussian":
            return p[0]
        if f == "uniform":
            return 0.5 * (p[0] + p[1])
        if f == "laplace":
            return p[0]
        if f == "exponential":
            return p[1] + 1.0 / p[0]
        w, m, _ = p
        return float(np.dot(w, m))

    @property
    def var(self):
        f, p = self.family, self.params
        if f == "gaussian":
            return p[1]
        if f == "uniform":
            return (p[1] - p[0]) ** 2 / 12.0
        if f == "laplace":
            return 2.0 * p[1] ** 2
        if f == "exponential":
            return 1.0 / p[0] ** 2
        w, m, v = (np.asarray(x) for x in p)
        mu = np.dot(w, m)
        return float(np.dot(w, v + (m - mu) ** 2))

    @property
    def order(self):
        return _ORDER[self.family]

    @property
    def kinks(self):
        """Points where the raw density is not smooth."""
        f, p = self.family, self.params
        if f == "uniform":
            return (p[0], p[1])
        if f == "laplace":
            return (p[0],)
        if f == "exponential":
            return (p[1],)
        return ()

    @property
    def tail_scale(self):
        """Length scale of the exponential/Gaussian tails (for panelling)."""
        f, p = self.family, self.params
        if f == "laplace":
            return p[1]
        if f == "exponential":
            return 1.0 / p[0]
        if f == "uniform":
            return p[1] - p[0]
        return math.sqrt(self.var)

    # evaluation -------------------------------------------------------
    def pdf(self, x):
        return self.smoothed(x, 0.0)[0]

    def smoothed(self, x, v):
        """Density and derivative of ``X + sqrt(v) Z`` at ``x``.

        For ``v = 0`` the raw density is returned; its derivative is the
        one-sided value at kinks and jumps.
        """
        x = np.asarray(x, dtype=float)
        f, p = self.family, self.params
        if f == "gaussian":
            var = p[1] + v
            d = x - p[0]
            dens = _norm_pdf(d, var)
            return dens, -d / var * dens
        if f == "mixture":
            dens = np.zeros_like(x)
            der = np.zeros_like(x)
            for w, m, vk in zip(*p):
                var = vk + v
                d = x - m
                g = w * _norm_pdf(d, var)
                dens += g
                der -= d / var * g
            return dens, der
        if f == "uniform":
            a, b = p
            width = b - a
            if v == 0:
                dens = np.where((x >= a) & (x <= b), 1.0 / width, 0.0)
                return dens, np.zeros_like(x)
            s = math.sqrt(v)
            za, zb = (x - a) / s, (x - b) / s
            right = x > 0.5 * (a + b)
            # difference of normal CDFs taken on the side where it is not 1 - 1
            diff = np.where(right, special.ndtr(-zb) - special.ndtr(-za),
                            special.ndtr(za) - special.ndtr(zb))
            dens = diff / width
            der = (np.exp(-0.5 * za * za) - np.exp(-0.5 * zb * zb)) / (math.sqrt(2 * math.pi) * s * width)
            return dens, der
        if f == "laplace":
            mu, b = p
            u = x - mu
            if v == 0:
                dens = np.exp(-np.abs(u) / b) / (2 * b)
                return dens, -np.sign(u) / b * dens
            s = math.sqrt(v)
            A, B = _edge_term(u, s, 1.0 / b), _edge_term(-u, s, 1.0 / b)
            return (A + B) / (2 * b), (B - A) / (2 * b * b)
        # exponential
        rate, loc = p
        u = x - loc
        if v == 0:
            dens = np.where(u >= 0, rate * np.exp(-rate * np.maximum(u, 0.0)), 0.0)
            return dens, -rate * dens
        s = math.sqrt(v)
        dens = rate * _edge_term(u, s, rate)
        return dens, -rate * dens + rate * _norm_pdf(u, v)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        f, p = self.family, self.params
        if f == "gaussian":
            return -0.5 * (x - p[0]) ** 2 / p[1] - 0.5 * math.log(2 * math.pi * p[1])
        if f == "laplace":
            return -np.abs(x - p[0]) / p[1] - math.log(2 * p[1])
        if f == "uniform":
            return np.where((x >= p[0]) & (x <= p[1]), -math.log(p[1] - p[0]), -np.inf)
        if f == "exponential":
            return np.where(x >= p[1], math.log(p[0]) - p[0] * (x - p[1]), -np.inf)
        w, m, v = (np.asarray(a) for a in p)
        comps = (np.log(w) - 0.5 * np.log(2 * math.pi * v))[:, None] - 0.5 * (x[None, :] - m[:, None]) ** 2 / v[:, None]
        return special.logsumexp(comps, axis=0)

    def cf(self, omega):
        """Characteristic function E exp(i omega X)."""
        w = np.asarray(omega, dtype=float)
        f, p = self.family, self.params
        if f == "gaussian":
            return np.exp(1j * w * p[0] - 0.5 * p[1] * w * w)
        if f == "uniform":
            a, b = p
            return np.exp(0.5j * w * (a + b)) * np.sinc(w * (b - a) / (2 * math.pi))
        if f == "laplace":
            return np.exp(1j * w * p[0]) / (1.0 + (p[1] * w) ** 2)
        if f == "exponential":
            rate, loc = p
            return np.exp(1j * w * loc) * rate / (rate - 1j * w)
        out = np.zeros(w.shape, dtype=complex)
        for wk, m, v in zip(*p):
            out += wk * np.exp(1j * w * m - 0.5 * v * w * w)
        return out

    def interval(self, mass):
        """Smallest convenient [lo, hi] leaving at most ``mass`` outside."""
        f, p = self.family, self.params
        if f == "uniform":
            return p
        if f == "exponential":
            rate, loc = p
            return loc, loc - math.log(mass) / rate
        if f == "laplace":
            mu, b = p
            r = -b * math.log(mass)  # two tails of mass/2 each
            return mu - r, mu + r
        if f == "gaussian":
            z = -special.ndtri(0.5 * mass)
            s = math.sqrt(p[1])
            return p[0] - z * s, p[0] + z * s
        z = -special.ndtri(0.5 * mass)
        lo = min(m - z * math.sqrt(v) for m, v in zip(p[1], p[2]))
        hi = max(m + z * math.sqrt(v) for m, v in zip(p[1], p[2]))
        return lo, hi

    def sample(self, rng, n):
        """Draw ``n`` samples by inverse-CDF transforms of uniforms from ``rng``."""
        f, p = self.family, self.params
        u = rng.random(n)
        if f == "gaussian":
            return p[0] + math.sqrt(p[1]) * special.ndtri(u)
        if f == "uniform":
            return p[0] + (p[1] - p[0]) * u
        if f == "laplace":
            c = u - 0.5
            return p[0] - p[1] * np.sign(c) * np.log1p(-2 * np.abs(c))
        if f == "exponential":
            return p[1] - np.log1p(-u) / p[0]
        w, m, v = (np.asarray(a) for a in p)
        comp = np.searchsorted(np.cumsum(w)[:-1], u, side="right")
        z = special.ndtri(rng.random(n))
        return m[comp] + np.sqrt(v[comp]) * z
