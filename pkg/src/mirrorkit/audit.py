"""Step-level and trajectory-level certification of the mirror-descent identities.

Every function here evaluates both sides of an exact algebraic identity and
returns the defect, normalized by 1 + |LHS| so that tolerances stay
meaningful across learning-rate sweeps. A residual at roundoff level
certifies the implementation; anything larger indicates a broken update
rule or a mismatched argument.
"""

from dataclasses import dataclass

import numpy as np

from .bregman import bregman
from .descent import Linear, convexity_margin

IDENTITY_RTOL = 1e-8
MINIMAX_SLACK = 1e-9
DENOMINATOR_FLOOR = 1e-14


@dataclass
class AuditRecord:
    """All terms of the per-step balance around one update."""

    step: int
    d_psi_prev: float
    d_psi_next: float
    d_loss_bregman: float
    e_term: float
    loss_noise: float
    local_residual: float


@dataclass
class MinimaxReport:
    """Energy-gain ratio of one trajectory against a reference weight."""

    numerator: float
    denominator: float
    ratio: float
    premise_certified: bool


def instantaneous_loss(l, m, d, w):
    """L(w) = l(y - f(x, w))."""
    return float(l.value(d.y - m.predict(d.x, w)))


def instantaneous_loss_grad(l, m, d, w):
    return -m.jacobian(d.x, w) * float(l.deriv(d.y - m.predict(d.x, w)))


def loss_map_bregman(l, m, d, w, w_ref):
    """Bregman divergence of w -> l(y - f(x, w)), which need not be convex."""
    w = np.asarray(w, dtype=float)
    w_ref = np.asarray(w_ref, dtype=float)
    return (
        instantaneous_loss(l, m, d, w)
        - instantaneous_loss(l, m, d, w_ref)
        - float(instantaneous_loss_grad(l, m, d, w_ref) @ (w - w_ref))
    )


def _e_term(p, l, m, d, w_next, w_prev, eta):
    d_mixed = bregman(p, w_next, w_prev).value - eta * loss_map_bregman(l, m, d, w_next, w_prev)
    return d_mixed + eta * instantaneous_loss(l, m, d, w_next)


def local_identity(p, l, m, w, w_prev, w_next, d, eta, step=0):
    """Per-step balance: divergence to the reference plus scaled noise loss
    equals the post-step divergence, the loss Bregman term, and the step's
    own nonnegative energy term."""
    v = d.y - m.predict(d.x, w)
    loss_noise = float(l.value(v))
    d_psi_prev = bregman(p, w, w_prev).value
    d_psi_next = bregman(p, w, w_next).value
    d_lb = loss_map_bregman(l, m, d, w, w_prev)
    e_term = _e_term(p, l, m, d, w_next, w_prev, eta)
    lhs = d_psi_prev + eta * loss_noise
    rhs = d_psi_next + eta * d_lb + e_term
    return AuditRecord(
        step=step,
        d_psi_prev=d_psi_prev,
        d_psi_next=d_psi_next,
        d_loss_bregman=d_lb,
        e_term=e_term,
        loss_noise=loss_noise,
        local_residual=abs(lhs - rhs) / (1.0 + abs(lhs)),
    )


def _require_constant(traj):
    if traj.schedule.kind != "constant":
        from .errors import ScheduleError

        raise ScheduleError(
            "the conservation law and minimax ratio hold for a fixed learning rate; "
            f"got schedule kind {traj.schedule.kind!r}"
        )
    return traj.schedule.eta


def _noises_for(traj, w, noises):
    if noises is not None:
        return np.asarray(noises, dtype=float)
    return np.array([d.y - traj.model.predict(d.x, w) for d in traj.data])


def _trajectory_terms(traj, w, noises):
    p, l, m = traj.potential, traj.loss, traj.model
    eta = _require_constant(traj)
    v = _noises_for(traj, w, noises)
    sum_loss_noise = float(np.sum(l.value(v))) if len(v) else 0.0
    sum_d_lb = 0.0
    sum_e = 0.0
    for i, d in enumerate(traj.data, start=1):
        w_prev = traj.iterate_before(i)
        w_next = traj.iterates[i - 1]
        sum_d_lb += loss_map_bregman(l, m, d, w, w_prev)
        sum_e += _e_term(p, l, m, d, w_next, w_prev, eta)
    return eta, sum_loss_noise, sum_d_lb, sum_e


def global_identity(traj, w, noises=None):
    """Telescoped balance over the whole trajectory (fixed learning rate).

    `noises` defaults to y_i - f(x_i, w), the only values for which the
    identity is exact.
    """
    p = traj.potential
    eta, sum_loss_noise, sum_d_lb, sum_e = _trajectory_terms(traj, w, noises)
    lhs = bregman(p, w, traj.w0).value + eta * sum_loss_noise
    rhs = bregman(p, w, traj.final).value + eta * sum_d_lb + sum_e
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def audit_trajectory(traj, w, noises=None):
    """Fill traj.audits with per-step records; return the global residual."""
    eta = _require_constant(traj)
    v = _noises_for(traj, w, noises)
    records = []
    for i, d in enumerate(traj.data, start=1):
        rec = local_identity(
            traj.potential,
            traj.loss,
            traj.model,
            w,
            traj.iterate_before(i),
            traj.iterates[i - 1],
            d,
            eta,
            step=i,
        )
        records.append(rec)
    traj.audits = records
    return global_identity(traj, w, noises=v if len(v) else None)


def minimax_ratio(traj, w, noises=None, certify=True):
    """Energy-gain ratio; at most 1 whenever the convexity premise holds.

    numerator := D_psi(w, w_T) + eta * sum_i D_{L_i}(w, w_{i-1})
    denominator := D_psi(w, w_0) + eta * sum_i l(v_i)

    `certify=False` skips the per-iterate convexity probes (useful in bulk
    achievability sweeps where only the ratio matters); the report then
    carries premise_certified=False.
    """
    from .errors import DegenerateError

    p, l, m = traj.potential, traj.loss, traj.model
    eta, sum_loss_noise, sum_d_lb, _ = _trajectory_terms(traj, w, noises)
    numerator = bregman(p, w, traj.final).value + eta * sum_d_lb
    denominator = bregman(p, w, traj.w0).value + eta * sum_loss_noise
    if denominator < DENOMINATOR_FLOOR:
        raise DegenerateError(
            "denominator vanishes: reference equals the start and all noises are zero"
        )
    certified = False
    if certify:
        probes = []
        for i, d in enumerate(traj.data, start=1):
            probes.append((traj.iterate_before(i), d))
            probes.append((traj.iterates[i - 1], d))
        certified = bool(probes) and convexity_margin(p, l, m, eta, probes) >= 0.0
    return MinimaxReport(numerator, denominator, numerator / denominator, certified)


def exponent_identity_residual(p, l, w, traj, z):
    """Telescoped exponent identity for the prediction-driven recursion.

    For iterates generated by the recursion grad psi(w_i) = grad psi(w_{i-1})
    + eta x_i l'(y_i - z_i) with an arbitrary prediction sequence z, the
    divergence-plus-loss exponent written at the start equals the same
    exponent written at the end plus per-step correction terms.
    """
    if not isinstance(traj.model, Linear):
        raise ValueError("the exponent identity is stated for linear models")
    eta = _require_constant(traj)
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    ys = np.array([d.y for d in traj.data])
    xs = [np.asarray(d.x, dtype=float) for d in traj.data]
    preds_w = np.array([float(x @ w) for x in xs])

    lhs = -bregman(p, w, traj.w0).value / eta
    lhs -= float(np.sum(l.value(ys - preds_w))) if len(ys) else 0.0
    lhs += float(np.sum(l.bregman(ys - preds_w, ys - z))) if len(ys) else 0.0

    rhs = -bregman(p, w, traj.final).value / eta
    for i in range(1, len(traj.data) + 1):
        w_prev = traj.iterate_before(i)
        w_i = traj.iterates[i - 1]
        pred_i = float(xs[i - 1] @ w_i)
        rhs -= (
            bregman(p, w_i, w_prev).value / eta
            + float(l.value(ys[i - 1] - pred_i))
            - float(l.bregman(ys[i - 1] - pred_i, ys[i - 1] - z[i - 1]))
        )
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def step_exponent_residual(p, l, w_i, w_prev, d, z, eta):
    """Single-step form of the exponent identity (the recursive-minimization step).

    For a step of the prediction-driven recursion,
    l(y - x^T w_i) - D_l(y - x^T w_i, y - z) equals
    l(y - x^T w_{i-1}) - D_l(y - x^T w_{i-1}, y - z) minus the symmetrized
    step divergence (grad psi(w_i) - grad psi(w_{i-1}))^T (w_i - w_{i-1}) / eta,
    which is D_psi(w_i, w_{i-1}) + D_psi(w_{i-1}, w_i) scaled by 1/eta.
    """
    w_i = np.asarray(w_i, dtype=float)
    w_prev = np.asarray(w_prev, dtype=float)
    x = np.asarray(d.x, dtype=float)
    pred_i = float(x @ w_i)
    pred_prev = float(x @ w_prev)
    lhs = float(l.value(d.y - pred_i)) - float(l.bregman(d.y - pred_i, d.y - z))
    rhs = (
        float(l.value(d.y - pred_prev))
        - float(l.bregman(d.y - pred_prev, d.y - z))
        - float((p.grad(w_i) - p.grad(w_prev)) @ (w_i - w_prev)) / eta
    )
    return abs(lhs - rhs) / (1.0 + abs(lhs))
