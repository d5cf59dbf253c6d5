"""Exponential-family samplers built on tabulated inverse CDFs.

Weight priors have densities proportional to exp(-D_psi(w, w0) / eta) and
noise densities are proportional to exp(-l(v)). Both factor per coordinate
for the separable potentials here, so sampling reduces to one-dimensional
inverse-transform draws from a tabulated CDF. The Gaussian special cases
(squared-L2 potential, quadratic loss) short-circuit to exact Box-Muller
draws; a flag forces the tabulated path so the two can be compared.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import xlogy

from .errors import GridError
from .losses import Quadratic
from .potentials import NegEntropy, SeparableQ, SquaredL2

log = logging.getLogger("mirrorkit")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

BOUNDARY_DENSITY = 1e-16
TAIL_MASS_LIMIT = 1e-8
_MAX_DOUBLINGS = 40


def _splitmix64(z):
    """Finalizer of the splitmix64 generator (Steele, Lea & Flood)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed, stream_index):
    """Counter-based child seed: splitmix64(seed + (index+1) * golden ratio)."""
    return _splitmix64((int(seed) + (int(stream_index) + 1) * _GOLDEN) & _MASK64)


class RngStream:
    """A named, reproducible random stream.

    The pair (seed, stream_index) fully determines the draw sequence;
    distinct stream indices give statistically independent streams via the
    splitmix64 derivation above.
    """

    def __init__(self, seed, stream_index=0):
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        self._gen = np.random.Generator(np.random.PCG64(derive_seed(seed, stream_index)))

    def uniform(self, size=None):
        """U[0, 1) variates."""
        return self._gen.random(size)

    def normal(self, size=None):
        """Standard normals via the Box-Muller transform.

        Pair outputs are interleaved, so shorter draws are prefixes of
        longer ones from an identically constructed stream.
        """
        n = 1 if size is None else int(np.prod(size))
        pairs = (n + 1) // 2
        u1 = 1.0 - self._gen.random(pairs)
        u2 = self._gen.random(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        z = z[:n]
        if size is None:
            return float(z[0])
        return z.reshape(size)

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size=size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_index={self.stream_index})"


@dataclass(frozen=True)
class GridSpec:
    """Tabulation grid in scale units around the density peak."""

    half_width: float = 12.0
    points: int = 4096
    auto_expand: bool = True

    def __post_init__(self):
        if self.half_width <= 0.0:
            raise ValueError("half_width must be > 0")
        if self.points < 16:
            raise ValueError("points must be >= 16")


class TabulatedDensity:
    """Inverse-CDF table for a 1-D density exp(-d(x) / eta).

    `d` is a convex function minimized (with value 0) at `center`; `dprime`
    is its derivative. The grid spans `half_width` scale units on each side
    of the center, doubling as needed until the boundary density falls below
    1e-16 of the peak (unless the boundary is the domain edge `lower`).
    Log-concavity gives a rigorous truncated-tail bound, which must stay
    below 1e-8 of the total mass.
    """

    def __init__(self, d, dprime, center, eta, scale, grid, lower=None):
        self.center = float(center)
        half = grid.half_width * scale
        for _ in range(_MAX_DOUBLINGS):
            lo = self.center - half
            hi = self.center + half
            clipped_lo = False
            if lower is not None and lo < lower:
                lo, clipped_lo = lower, True
            ok_lo = clipped_lo or np.exp(-d(lo) / eta) < BOUNDARY_DENSITY
            ok_hi = np.exp(-d(hi) / eta) < BOUNDARY_DENSITY
            if (ok_lo and ok_hi) or not grid.auto_expand:
                break
            half *= 2.0
        xs = np.linspace(lo, hi, grid.points)
        dens = np.exp(-d(xs) / eta)
        cdf = np.concatenate([[0.0], cumulative_trapezoid(dens, xs)])
        total = cdf[-1]
        if not (np.isfinite(total) and total > 0.0):
            raise GridError("tabulated density has no finite mass on the grid")
        tail = 0.0
        if not clipped_lo:
            slope = -float(dprime(lo))
            tail += np.inf if slope <= 0.0 else float(dens[0]) * eta / slope
        slope = float(dprime(hi))
        tail += np.inf if slope <= 0.0 else float(dens[-1]) * eta / slope
        if not tail / total < TAIL_MASS_LIMIT:
            raise GridError(
                f"truncated tail mass {tail / total:.3e} of the tabulated density "
                f"exceeds {TAIL_MASS_LIMIT} (grid too narrow)"
            )
        self.xs = xs
        self.pdf = dens / total
        self.cdf = cdf / total
        self.normalization = float(total)
        self.tail_bound = float(tail / total)
        self._open_lower = lower if clipped_lo else None
        log.debug(
            "tabulated density on [%g, %g] (%d points): normalization %.12g, tail bound %.2e",
            lo, hi, grid.points, self.normalization, self.tail_bound,
        )

    def ppf(self, u):
        """Monotone-interpolated inverse CDF."""
        w = np.interp(u, self.cdf, self.xs)
        if self._open_lower is not None:
            w = np.maximum(w, np.nextafter(self._open_lower, np.inf))
        return w

    def sample(self, rng, size=None):
        return self.ppf(rng.uniform(size))

    def moment(self, k):
        """Grid-quadrature estimate of E[x^k] under the tabulated density."""
        return float(np.trapezoid(self.xs**k * self.pdf, self.xs))


def _laplace_scale(p1, c, eta):
    """Characteristic width sqrt(eta / psi''(c)) of the density peak.

    For SeparableQ the curvature at 0 is zero or unbounded, so the unit
    e-folding distance of |x|^q / (q eta) caps the estimate; an undershoot
    is harmless because the grid doubles itself as needed.
    """
    if isinstance(p1, SeparableQ):
        q = p1.q
        fold = float((q * eta) ** (1.0 / q))
        if c == 0.0:
            return fold
        curvature = (q - 1.0) * abs(c) ** (q - 2.0)
        if not (np.isfinite(curvature) and curvature > 1e-12):
            return fold
        return max(min(float(np.sqrt(eta / curvature)), fold), 1e-6 * fold)
    curvature = float(p1.hessian_diag(np.array([c]))[0])
    return float(np.sqrt(eta / curvature))


def _coordinate_bregman(p1, c):
    """Scalar Bregman divergence x -> D_psi(x, c) for a 1-D potential."""
    if isinstance(p1, SquaredL2):
        return (lambda x: 0.5 * (x - c) ** 2), (lambda x: x - c)
    if isinstance(p1, NegEntropy):
        d = lambda x: xlogy(x, x / c) - x + c
        dp = lambda x: np.log(x / c) if x > 0 else -np.inf
        return d, dp
    q = p1.q
    gc = np.sign(c) * np.abs(c) ** (q - 1.0)
    d = lambda x: np.abs(x) ** q / q - np.abs(c) ** q / q - gc * (x - c)
    dp = lambda x: np.sign(x) * np.abs(x) ** (q - 1.0) - gc
    return d, dp


class ExpFamilySpec:
    """Weight prior exp(-D_psi(w, center) / scale) over a separable potential."""

    def __init__(self, potential, center, scale, grid=GridSpec()):
        if not scale > 0.0:
            raise ValueError("scale must be > 0")
        self.potential = potential
        self.center = potential.check_domain(np.asarray(center, dtype=float)).copy()
        self.scale = float(scale)
        self.grid = grid
        self._tables = None

    def _one_dim(self):
        p = self.potential
        if isinstance(p, SeparableQ):
            return SeparableQ(p.q, 1)
        return type(p)(1)

    def tables(self):
        """Per-coordinate inverse-CDF tables (built lazily, then cached)."""
        if self._tables is None:
            p1 = self._one_dim()
            lower = 0.0 if isinstance(self.potential, NegEntropy) else None
            tabs = []
            for c in self.center:
                d, dp = _coordinate_bregman(p1, float(c))
                s = _laplace_scale(p1, float(c), self.scale)
                tabs.append(
                    TabulatedDensity(d, dp, float(c), self.scale, s, self.grid, lower=lower)
                )
            self._tables = tabs
        return self._tables


def sample_weight(spec, rng, size=None, force_tabulated=False):
    """Draw weight vectors from the exponential-family prior.

    Returns shape (dim,) for size=None, else (size, dim). Draws are
    trial-major, so a single draw is the first row of a batch from an
    identically constructed stream. The squared-L2 potential short-circuits
    to exact Gaussian draws N(center, scale).
    """
    n = 1 if size is None else int(size)
    dim = spec.potential.dim
    if isinstance(spec.potential, SquaredL2) and not force_tabulated:
        z = np.asarray(rng.normal((n, dim)))
        out = spec.center + np.sqrt(spec.scale) * z
    else:
        tabs = spec.tables()
        u = rng.uniform((n, dim))
        out = np.empty((n, dim))
        for j in range(dim):
            out[:, j] = tabs[j].ppf(u[:, j])
    return out[0] if size is None else out


_NOISE_TABLES = {}


def _noise_table(l, grid=GridSpec()):
    key = (l.kind, grid)
    if key not in _NOISE_TABLES:
        curvature = float(l.second_deriv(0.0))
        scale = 1.0 / np.sqrt(curvature) if curvature > 1e-12 else float(4.0**0.25)
        _NOISE_TABLES[key] = TabulatedDensity(
            l.value, l.deriv, 0.0, 1.0, scale, grid
        )
    return _NOISE_TABLES[key]


def sample_noise(l, rng, size=None, force_tabulated=False):
    """Draw noises with density proportional to exp(-l(v)).

    The quadratic loss short-circuits to exact N(0, 1) draws.
    """
    if isinstance(l, Quadratic) and not force_tabulated:
        return rng.normal(size)
    table = _noise_table(l)
    draws = table.sample(rng, 1 if size is None else int(size))
    return float(draws[0]) if size is None else draws


@dataclass
class MirrorMeanReport:
    """Monte Carlo check that the mean of grad psi(w) equals grad psi(center)."""

    mc_estimate: np.ndarray
    target: np.ndarray
    sigma_bound: np.ndarray
    passed: bool


def mirror_mean_check(spec, n_samples, rng):
    """Certify E[grad psi(w)] = grad psi(center) within a 3-sigma MC band."""
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 10^4 for a meaningful band")
    draws = sample_weight(spec, rng, size=n_samples)
    mirror = spec.potential.grad(draws)
    est = mirror.mean(axis=0)
    sd = mirror.std(axis=0, ddof=1)
    bound = 3.0 * sd / np.sqrt(n_samples)
    target = spec.potential.grad(spec.center)
    return MirrorMeanReport(est, target, bound, bool(np.all(np.abs(est - target) <= bound)))


def sample_white_noise(spec, rng, size=None):
    """Zero-mean noise with variance spec.variance from the named family."""
    n = 1 if size is None else int(size)
    sd = np.sqrt(spec.variance)
    if spec.kind == "gaussian":
        draws = sd * np.asarray(rng.normal(n))
    elif spec.kind == "uniform":
        draws = (rng.uniform(n) - 0.5) * np.sqrt(12.0) * sd
    else:
        draws = np.where(rng.uniform(n) < 0.5, -sd, sd)
    return float(draws[0]) if size is None else draws
