"""Change-of-variable factors between the physical density and its fixed-domain forms.

The moving interval A(t) < x < A(t) + L(t) is mapped to the reference interval
0 < xi < L0 by xi = (x - A) L0 / L, turning psi(x, t) into u(xi, t).  A further
exponential substitution

    u = w * exp(log_time_factor + log_shape_factor)

absorbs the advection produced by the moving frame, leaving w to satisfy a
pure potential-form heat equation in the rescaled clock s(t).  The factors are
kept in log space throughout: at the long horizons used for the critical-case
fits (t ~ 1e3 with near-ballistic endpoints) the exponents reach several
hundred and the linear-space factors would overflow.

For radially symmetric balls |x| < R(t) the analogous substitution maps psi to
W via ``log_radial_factor``; the interval machinery is recovered with L = 2 R.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .motion import (
    BoundaryMotion,
    CriticalMotion,
    MotionState,
    eval_motion,
    _kinematics,
)

__all__ = [
    "xi_from_x",
    "x_from_xi",
    "drift_integral",
    "log_time_factor",
    "log_shape_factor",
    "u_from_w",
    "w_from_u",
    "initial_w_from_u",
    "require_centered",
    "log_radial_factor",
    "psi_from_W",
    "initial_W_from_psi",
]

_QUAD_OPTS = {"epsabs": 1e-12, "epsrel": 1e-12, "limit": 400}


def _state(motion: BoundaryMotion, t: float, state: MotionState | None) -> MotionState:
    if state is not None:
        if state.t != t:
            raise ValueError(f"state is for t={state.t}, not t={t}")
        return state
    return eval_motion(motion, t)


def xi_from_x(motion: BoundaryMotion, x, t: float, state: MotionState | None = None):
    """Map physical position(s) to the reference coordinate xi = (x - A) L0 / L."""
    st = _state(motion, t, state)
    return (np.asarray(x, dtype=float) - st.A) * (motion.L0 / st.L)


def x_from_xi(motion: BoundaryMotion, xi, t: float, state: MotionState | None = None):
    st = _state(motion, t, state)
    return st.A + np.asarray(xi, dtype=float) * (st.L / motion.L0)


def drift_integral(motion: BoundaryMotion, t: float) -> float:
    """Accumulated frame-drift penalty: integral of Adot^2 / 4D over [0, t].

    Evaluated by adaptive quadrature for every family, which keeps this
    routine independent of the closed-form reductions used elsewhere.
    """
    if t < 0.0:
        raise ValueError(f"drift_integral requires t >= 0, got {t}")
    if t == 0.0:
        return 0.0
    inv4d = 0.25 / motion.physics.D
    val, _ = quad(lambda z: _kinematics(motion, z)[4] ** 2 * inv4d, 0.0, t, **_QUAD_OPTS)
    return val


def _critical_log_time_factor(motion: CriticalMotion, t: float) -> float:
    """Closed form of f0 t - integral Adot^2 / 4D for the critical motion.

    With half-length derivative c* - alpha/(1+t) - eta'(t) the square expands
    into elementary pieces; f0 t cancels the c*^2 term exactly, which is why
    this is evaluated in closed form rather than by quadrature (the two huge
    terms would otherwise have to cancel numerically at t ~ 1e4).
    """
    D = motion.physics.D
    cs = motion.physics.c_star
    al = motion.alpha
    k, p = motion.eta.k, motion.eta.p
    acc = 2.0 * cs * al * math.log1p(t) - al * al * t / (1.0 + t)
    if k != 0.0:
        op = (1.0 + t) ** p
        acc += 2.0 * cs * k * (op - 1.0)
        acc -= 2.0 * al * k * p * ((1.0 + t) ** (p - 1.0) - 1.0) / (p - 1.0)
        acc -= k * k * p * p * ((1.0 + t) ** (2.0 * p - 1.0) - 1.0) / (2.0 * p - 1.0)
    return acc / (4.0 * D)


def log_time_factor(motion: BoundaryMotion, t: float) -> float:
    """log of the xi-independent factor in u/w: f0 t - integral Adot^2 / 4D."""
    if isinstance(motion, CriticalMotion):
        return _critical_log_time_factor(motion, t)
    return motion.physics.f0 * t - drift_integral(motion, t)


def log_shape_factor(motion: BoundaryMotion, xi, t: float,
                     state: MotionState | None = None):
    """log of the xi-dependent factor in u/w.

    Equals 0.5 log(L0/L) - xi^2 Ldot L / (4 D L0^2) - xi Adot L / (2 D L0);
    vectorized over xi.
    """
    st = _state(motion, t, state)
    D = motion.physics.D
    L0 = motion.L0
    xi = np.asarray(xi, dtype=float)
    return (0.5 * math.log(L0 / st.L)
            - xi * xi * (st.Ldot * st.L / (4.0 * D * L0 ** 2))
            - xi * (st.Adot * st.L / (2.0 * D * L0)))


def u_from_w(motion: BoundaryMotion, xi, t: float, w_values,
             state: MotionState | None = None):
    log_fac = log_time_factor(motion, t) + log_shape_factor(motion, xi, t, state)
    return np.asarray(w_values, dtype=float) * np.exp(log_fac)


def w_from_u(motion: BoundaryMotion, xi, t: float, u_values,
             state: MotionState | None = None):
    log_fac = log_time_factor(motion, t) + log_shape_factor(motion, xi, t, state)
    return np.asarray(u_values, dtype=float) * np.exp(-log_fac)


def initial_w_from_u(motion: BoundaryMotion, xi, u0_values):
    """Initial transform w(xi, 0) = u(xi, 0) exp(xi^2 Ldot(0)/(4 D L0) + xi Adot(0)/(2 D)).

    Special case of ``w_from_u`` at t = 0, written out because it needs no
    quadrature and is used to seed both the series expansion and the solvers.
    """
    L, Ldot, _, _, Adot, _ = _kinematics(motion, 0.0)
    D = motion.physics.D
    xi = np.asarray(xi, dtype=float)
    log_fac = xi * xi * (Ldot / (4.0 * D * L)) + xi * (Adot / (2.0 * D))
    return np.asarray(u0_values, dtype=float) * np.exp(log_fac)


def require_centered(motion: BoundaryMotion, t_max: float, num_samples: int = 64) -> None:
    """Raise unless A = -L/2 holds on [0, t_max] (sampled).

    The potential-form w equation and the radial reduction are only valid for
    intervals centred at the origin.
    """
    for t in np.linspace(0.0, t_max, num_samples):
        L, _, _, A, _, _ = _kinematics(motion, float(t))
        if abs(A + 0.5 * L) > 1e-9 * max(motion.L0, L):
            raise ValueError(
                f"motion is not centred: A + L/2 = {A + 0.5 * L:.3e} at t={t:.6g}")


# ---------------------------------------------------------------------------
# radially symmetric ball |x| < R(t), R = L/2 of a centred interval motion


def log_radial_factor(motion: BoundaryMotion, r, t: float, n_dim: int,
                      state: MotionState | None = None):
    """log(W / psi) for the ball substitution, vectorized over the radius r.

    W = psi * (R/R0)^{n/2} exp(-f0 t + integral Rdot^2/4D
                               + Rdot R (r^2 - R0^2) / (4 D R0^2)),
    with R = L/2 taken from the centred interval motion.
    """
    st = _state(motion, t, state)
    D = motion.physics.D
    R0 = 0.5 * motion.L0
    R, Rdot = 0.5 * st.L, 0.5 * st.Ldot
    r = np.asarray(r, dtype=float)
    return (0.5 * n_dim * math.log(R / R0)
            - log_time_factor(motion, t)
            + Rdot * R * (r * r - R0 ** 2) / (4.0 * D * R0 ** 2))


def psi_from_W(motion: BoundaryMotion, r, t: float, W_values, n_dim: int,
               state: MotionState | None = None):
    log_fac = log_radial_factor(motion, r, t, n_dim, state)
    return np.asarray(W_values, dtype=float) * np.exp(-log_fac)


def initial_W_from_psi(motion: BoundaryMotion, r, psi0_values, n_dim: int):
    """Initial radial transform; at t = 0 only the Rdot R (r^2 - R0^2) term survives."""
    L, Ldot, _, _, _, _ = _kinematics(motion, 0.0)
    D = motion.physics.D
    R0 = 0.5 * motion.L0
    r = np.asarray(r, dtype=float)
    log_fac = 0.25 * Ldot * L * (r * r - R0 ** 2) / (4.0 * D * R0 ** 2)
    return np.asarray(psi0_values, dtype=float) * np.exp(log_fac)
