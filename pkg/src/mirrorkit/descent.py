"""Iteration engines: mirror steps, symmetric mirror steps, and plain SGD.

The update always happens in the mirror domain: the gradient of the
potential is shifted by a multiple of the model Jacobian times the loss
derivative, then pulled back through the inverse mirror map. With the
squared-L2 potential this reduces to ordinary SGD bit for bit.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DomainError, StabilityWarning
from .losses import LossFn
from .potentials import Potential, SeparableQ

HESSIAN_PROBE_EXCLUSION = 1e-8
FD_STEP = 1e-5


@dataclass
class DataPoint:
    """One observation: input vector x and scalar output y."""

    x: np.ndarray
    y: float

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = float(self.y)
        if not (np.all(np.isfinite(self.x)) and np.isfinite(self.y)):
            raise ValueError("data point has non-finite entries")


class Linear:
    """predict(x, w) = x^T w."""

    kind = "linear"

    def predict(self, x, w):
        return float(np.dot(x, w))

    def jacobian(self, x, w):
        return np.asarray(x, dtype=float)

    def __repr__(self):
        return "Linear()"


class GeneralizedLinear:
    """predict(x, w) = g(x^T w) for a smooth scalar link g."""

    kind = "glm"

    def __init__(self, link):
        if link not in ("tanh", "softplus"):
            raise ValueError(f"unknown link {link!r}")
        self.link = link

    def _g(self, u):
        if self.link == "tanh":
            return np.tanh(u)
        return np.logaddexp(0.0, u)

    def _g_prime(self, u):
        if self.link == "tanh":
            t = np.tanh(u)
            return 1.0 - t * t
        return expit(u)

    def predict(self, x, w):
        return float(self._g(np.dot(x, w)))

    def jacobian(self, x, w):
        x = np.asarray(x, dtype=float)
        return self._g_prime(np.dot(x, w)) * x

    def __repr__(self):
        return f"GeneralizedLinear(link={self.link!r})"


@dataclass(frozen=True)
class Constant:
    """Fixed learning rate."""

    eta: float
    kind = "constant"

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError("eta must be > 0")

    def rate(self, i):
        return self.eta


@dataclass(frozen=True)
class RobbinsMonro:
    """rate(i) = c / i: divergent sum, summable squares."""

    c: float
    kind = "robbins_monro"

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError("c must be > 0")

    def rate(self, i):
        return self.c / i


@dataclass(frozen=True)
class NoiseSpec:
    """White-noise description for the stochastic-convergence setting."""

    variance: float = 1.0
    kind: str = "gaussian"

    def __post_init__(self):
        if not self.variance > 0.0:
            raise ValueError("variance must be > 0")
        if self.kind not in ("gaussian", "uniform", "rademacher"):
            raise ValueError(f"unknown noise kind {self.kind!r}")


@dataclass
class Trajectory:
    """Iterates of one run plus everything needed to audit it."""

    w0: np.ndarray
    iterates: list
    data: list
    schedule: object
    etas: list
    potential: Potential
    loss: LossFn
    model: object
    algorithm: str = "smd"
    audits: list = field(default_factory=list)

    def __len__(self):
        return len(self.iterates)

    @property
    def final(self):
        return self.iterates[-1] if self.iterates else self.w0

    def iterate_before(self, i):
        """w_{i-1} for a 1-based step index i."""
        return self.w0 if i == 1 else self.iterates[i - 2]


def smd_step(p, l, m, w_prev, d, eta):
    """One mirror step: shift grad psi(w) by eta * J_f * l'(residual)."""
    if eta <= 0.0:
        raise ValueError("eta must be > 0")
    w_prev = p.check_domain(np.asarray(w_prev, dtype=float))
    increment = eta * m.jacobian(d.x, w_prev) * l.deriv(d.y - m.predict(d.x, w_prev))
    if not np.any(increment):
        return w_prev.copy()
    # check_domain catches floating-point escapes (exp underflowing to 0)
    return p.check_domain(p.grad_inv(p.grad(w_prev) + increment))


def ssmd_step(p, l, w_prev, d, eta):
    """Symmetric mirror step for linear models: eta * x * (l'(y) - l'(x^T w))."""
    if eta <= 0.0:
        raise ValueError("eta must be > 0")
    w_prev = p.check_domain(np.asarray(w_prev, dtype=float))
    increment = eta * d.x * (l.deriv(d.y) - l.deriv(float(np.dot(d.x, w_prev))))
    if not np.any(increment):
        return w_prev.copy()
    return p.check_domain(p.grad_inv(p.grad(w_prev) + increment))


def genrec_step(p, l, w_prev, d, z, eta):
    """Prediction-driven mirror step: eta * x * l'(y - z) for an arbitrary z."""
    w_prev = p.check_domain(np.asarray(w_prev, dtype=float))
    increment = eta * d.x * l.deriv(d.y - z)
    if not np.any(increment):
        return w_prev.copy()
    return p.check_domain(p.grad_inv(p.grad(w_prev) + increment))


def _sgd_step(l, m, w_prev, d, eta):
    return w_prev + eta * m.jacobian(d.x, w_prev) * l.deriv(d.y - m.predict(d.x, w_prev))


def iterate(p, l, m, data, schedule, w0, algorithm="smd", check_margin=True):
    """Run a full trajectory over `data`, recording every iterate.

    `algorithm` is one of "smd", "ssmd" (linear model only), or "sgd"
    (plain gradient update, meaningful with the squared-L2 potential).
    A negative convexity margin at an iterate only warns: the convexity
    premise is sufficient, not necessary, and exploring past it is useful.
    """
    if algorithm not in ("smd", "ssmd", "sgd"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if algorithm == "ssmd" and not isinstance(m, Linear):
        raise ConfigError("ssmd is defined for linear models only")
    w = p.check_domain(np.asarray(w0, dtype=float)).copy()
    iterates, etas = [], []
    warned = False
    for i, d in enumerate(data, start=1):
        eta = schedule.rate(i)
        try:
            if algorithm == "smd":
                w = smd_step(p, l, m, w, d, eta)
            elif algorithm == "ssmd":
                w = ssmd_step(p, l, w, d, eta)
            else:
                w = _sgd_step(l, m, w, d, eta)
        except DomainError as e:
            raise DomainError(f"step {i}: {e}") from e
        iterates.append(w)
        etas.append(eta)
        if check_margin and not warned:
            if convexity_margin(p, l, m, eta, [(w, d)]) < 0.0:
                warnings.warn(
                    f"convexity margin negative at step {i}; "
                    "the minimax premise is not certified on this run",
                    StabilityWarning,
                    stacklevel=2,
                )
                warned = True
    return Trajectory(
        w0=np.asarray(w0, dtype=float).copy(),
        iterates=iterates,
        data=list(data),
        schedule=schedule,
        etas=etas,
        potential=p,
        loss=l,
        model=m,
        algorithm=algorithm,
    )


def run_general_recursion(p, l, data, z, eta, w0):
    """Trajectory of the prediction-driven recursion for a given z sequence."""
    if len(z) != len(data):
        raise ValueError("z and data must have equal length")
    w = p.check_domain(np.asarray(w0, dtype=float)).copy()
    iterates = []
    for d, z_i in zip(data, z):
        w = genrec_step(p, l, w, d, z_i, eta)
        iterates.append(w)
    return Trajectory(
        w0=np.asarray(w0, dtype=float).copy(),
        iterates=iterates,
        data=list(data),
        schedule=Constant(eta),
        etas=[eta] * len(data),
        potential=p,
        loss=l,
        model=Linear(),
        algorithm="genrec",
    )


def run_trajectory(cfg):
    """Generate the configured data stream and run the configured algorithm."""
    from .datagen import generate_problem

    p = cfg.build_potential()
    l = cfg.build_loss()
    m = cfg.build_model()
    schedule = cfg.build_schedule()
    problem = generate_problem(cfg)
    return iterate(
        p,
        l,
        m,
        problem.data,
        schedule,
        cfg.w0_vector(),
        algorithm=cfg.algorithm,
        check_margin=cfg.check_margin,
    )


def _loss_hessian(l, m, d, w):
    """Hessian of w -> l(y - f(x, w)); analytic for linear models."""
    if isinstance(m, Linear):
        x = np.asarray(d.x, dtype=float)
        return np.outer(x, x) * float(l.second_deriv(d.y - np.dot(x, w)))
    grad = lambda v: -m.jacobian(d.x, v) * l.deriv(d.y - m.predict(d.x, v))
    n = w.size
    H = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = FD_STEP
        H[:, k] = (grad(w + e) - grad(w - e)) / (2.0 * FD_STEP)
    return 0.5 * (H + H.T)


def convexity_margin(p, l, m, eta, probes):
    """Smallest eigenvalue of hess psi - eta * hess L over the probe points.

    A positive value certifies (on the probes) the convexity premise behind
    the minimax and risk-sensitive optimality statements. Near-zero
    coordinates are excluded for SeparableQ, whose Hessian is singular or
    zero there.
    """
    best = np.inf
    for w, d in probes:
        w = p.check_domain(np.asarray(w, dtype=float))
        keep = (
            np.abs(w) >= HESSIAN_PROBE_EXCLUSION
            if isinstance(p, SeparableQ)
            else np.ones(w.size, dtype=bool)
        )
        if not np.any(keep):
            continue
        A = np.diag(p.hessian_diag(w)[keep]) - eta * _loss_hessian(l, m, d, w)[np.ix_(keep, keep)]
        best = min(best, float(np.linalg.eigvalsh(A)[0]))
    return best


def persistent_excitation(data, delta):
    """Earliest T with lambda_min(sum_{i<=T} x_i x_i^T) >= delta, if any."""
    if delta <= 0.0:
        raise ValueError("delta must be > 0")
    if not data:
        return False, 0
    m = np.asarray(data[0].x).size
    G = np.zeros((m, m))
    for T, d in enumerate(data, start=1):
        x = np.asarray(d.x, dtype=float)
        G += np.outer(x, x)
        if float(np.linalg.eigvalsh(G)[0]) >= delta:
            return True, T
    return False, 0
