"""Bounds and exponent fits at the critical spreading speed.

When a centred interval spreads at the free speed c* = 2 sqrt(D f0) minus a
logarithmic lag alpha log(t + 1), the density neither grows nor dies at a
plain exponential rate: it follows the power law

    psi(A + y, t) = O( y * t^(-1 - n/2 + alpha c* / 2D) )

in n space dimensions.  This module provides the machinery to verify that law
numerically:

* explicit super- and subsolution barriers for the potential-form field w,
  calibrated against a finite-difference run and checked for sign violations;
* a potential trace P(t) = Lddot L^3 / 4 D^2 whose growth drives the barriers;
* a least-squares fit of the decay exponent of psi at fixed distances from
  the moving endpoint, compared with the predicted value;
* one-sided comparison series for general motions with pinched potentials.

The subsolution glues a scaled Airy function to its tangent line and then to
zero; it exists only once P is large enough for the glued profile to fit
inside the domain and is monotone only while P is nondecreasing, so all
barrier routines start from a computed onset time rather than from zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import j0, jn_zeros

from .airy import airy_ai, airy_first_zero
from .eigen import solve_sl
from .exact import SeriesSolution, eval_physical
from .motion import (
    BoundaryMotion,
    CaseKind,
    CriticalMotion,
    SeparableMotion,
    classify,
    eval_motion,
    motion_content_hash,
    motion_to_document,
    time_rescale,
    _kinematics,
)
from .numeric import GridSolution, solve_radial, solve_w
from .transforms import (
    log_shape_factor,
    log_time_factor,
    psi_from_W,
    initial_w_from_u,
)

__all__ = [
    "EnvelopeViolationError",
    "PotentialTrace",
    "EnvelopePair",
    "CriticalFitReport",
    "BoundSeries",
    "potential_value",
    "potential_trace",
    "potential_rate",
    "potential_asymptote",
    "subsolution_onset",
    "supersolution",
    "subsolution",
    "radial_subsolution",
    "radial_supersolution",
    "supersolution_residual",
    "subsolution_residual",
    "verify_envelope",
    "envelope_to_csv",
    "boundary_gradient",
    "fit_exponent",
    "fit_report_document",
    "verify_nested",
    "envelope_bounds_general",
    "eval_bound",
]

_AI0, _AIP0 = airy_ai(0.0)
_C1 = airy_first_zero()
# Tangent-line extent of the glued barrier: it reaches zero at
# z = -Ai(0)/Ai'(0), i.e. at xi/L0 = -_SLOPE_SUM / P^(1/3).
_SLOPE_SUM = _AI0 / _AIP0 + _C1          # about -3.7098
_QUAD_OPTS = {"epsabs": 1e-10, "epsrel": 1e-10, "limit": 400}

_BESSEL_J0_ZERO = float(jn_zeros(0, 1)[0])


class EnvelopeViolationError(RuntimeError):
    """A calibrated barrier was crossed by more than the allowed slack."""


def _ai_vec(z: np.ndarray):
    vals = np.empty_like(z)
    ders = np.empty_like(z)
    flat_v, flat_d = vals.ravel(), ders.ravel()
    for i, zz in enumerate(np.ravel(z)):
        flat_v[i], flat_d[i] = airy_ai(float(zz))
    return vals, ders


# ---------------------------------------------------------------------------
# potential trace


@dataclass(frozen=True)
class PotentialTrace:
    """Sampled barrier-driving potential P(t) (or Q(t) for balls)."""

    times: np.ndarray
    values: np.ndarray
    radial: bool = False


def potential_value(motion: BoundaryMotion, t: float, radial: bool = False) -> float:
    """P = Lddot L^3 / 4 D^2; the ball variant Q = Rddot R^3 / 4 D^2 = P / 16."""
    L, _, Lddot = _kinematics(motion, t)[:3]
    P = Lddot * L ** 3 / (4.0 * motion.physics.D ** 2)
    return P / 16.0 if radial else P


def potential_trace(motion: BoundaryMotion, times, radial: bool = False) -> PotentialTrace:
    ts = np.asarray(times, dtype=float)
    vals = np.array([potential_value(motion, float(t), radial) for t in ts])
    return PotentialTrace(ts, vals, radial)


def potential_rate(motion: BoundaryMotion, t: float, radial: bool = False) -> float:
    """dP/dt by five-point central differences (the motions expose only Lddot)."""
    h = 1e-4 * (1.0 + abs(t))
    if t - 2.0 * h < 0.0:
        p = [potential_value(motion, t + k * h, radial) for k in range(3)]
        return (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h)
    p = [potential_value(motion, t + k * h, radial) for k in (-2, -1, 1, 2)]
    return (p[0] - 8.0 * p[1] + 8.0 * p[2] - p[3]) / (12.0 * h)


def potential_asymptote(motion: CriticalMotion) -> float:
    """Leading coefficient of P(t) ~ coeff * t for a critical motion."""
    if not isinstance(motion, CriticalMotion):
        raise ValueError("the linear asymptote exists only for critical motions")
    ph = motion.physics
    return 4.0 * motion.alpha * ph.c_star ** 3 / ph.D ** 2


# ---------------------------------------------------------------------------
# barriers for the potential-form field


def _check_potential_sign(motion: BoundaryMotion, t: float, samples: int = 128) -> None:
    for z in np.linspace(0.0, t, samples):
        if potential_value(motion, float(z)) < 0.0:
            raise ValueError(
                f"supersolution needs a nonnegative potential; P({z:.6g}) < 0")


def supersolution(motion: BoundaryMotion, xi, t: float) -> np.ndarray:
    """Decaying sine barrier sin(pi xi / L0) exp(-D pi^2 s(t) / L0^2).

    Lies above any solution of the potential form (up to calibration) because
    the potential term only removes mass when P >= 0; refuses motions whose
    potential dips negative before t.
    """
    _check_potential_sign(motion, t)
    L0 = motion.L0
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    s = time_rescale(motion, t)
    return np.sin(np.pi * xi / L0) * math.exp(-motion.physics.D * np.pi ** 2 * s / L0 ** 2)


def _min_potential(xi_extent_ratio: float) -> float:
    # The glued barrier spans xi/L0 in [0, -_SLOPE_SUM / P^(1/3)]; it must fit
    # inside the allowed extent (the full interval, or half of it for balls).
    return (-_SLOPE_SUM / xi_extent_ratio) ** 3


def subsolution_onset(motion: BoundaryMotion, t_max: float,
                      radial: bool = False, samples: int = 4097) -> float:
    """Earliest time from which the Airy barrier is defined and monotone.

    Requires P(t) large enough for the profile to fit in the domain and
    dP/dt >= 0 from the onset to t_max.  Raises if no such time exists.
    """
    p_min = _min_potential(0.5 if radial else 1.0)
    ts = np.linspace(0.0, t_max, samples)
    pvals = np.array([potential_value(motion, float(t)) for t in ts])
    rates = np.array([potential_rate(motion, float(t)) for t in ts])
    rate_tol = -1e-10 * max(1.0, float(np.max(np.abs(rates))))
    ok = (pvals >= p_min) & np.array(
        [bool(np.all(rates[i:] >= rate_tol)) for i in range(samples)])
    idx = np.nonzero(ok)[0]
    if idx.size == 0:
        raise ValueError(
            f"no valid barrier onset in [0, {t_max}]: need P >= {p_min:.2f} "
            "with nondecreasing P afterwards")
    i = int(idx[0])
    if i == 0:
        return 0.0
    if pvals[i - 1] < p_min <= pvals[i]:
        return float(brentq(
            lambda z: potential_value(motion, z) - p_min, ts[i - 1], ts[i], xtol=1e-10))
    return float(ts[i])


def _barrier_profile(motion: BoundaryMotion, xi: np.ndarray, t: float):
    """Piecewise barrier value, xi-derivative and second derivative at time t."""
    L0 = motion.L0
    P = potential_value(motion, t)
    if P <= 0.0:
        raise ValueError(f"barrier undefined: P({t}) = {P:.3g} is not positive")
    p13 = P ** (1.0 / 3.0)
    xi_hat = xi / L0
    z = p13 * xi_hat + _C1
    xi_star_hat = -_SLOPE_SUM / p13
    ai, aip = _ai_vec(z)
    val = np.where(z <= 0.0, ai / p13, (_AI0 + _AIP0 * z) / p13)
    der = np.where(z <= 0.0, aip / L0, _AIP0 / L0)
    # Ai'' = z Ai on the curved part; the tangent part is linear.
    der2 = np.where(z <= 0.0, p13 * z * ai / L0 ** 2, 0.0)
    dead = xi_hat >= xi_star_hat
    val = np.where(dead, 0.0, val)
    der = np.where(dead, 0.0, der)
    der2 = np.where(dead, 0.0, der2)
    return val, der, der2, P, p13


def _gauge_log(motion: BoundaryMotion, t_from: float, t_to: float) -> float:
    """log of the slow gauge a(t) multiplying the barrier, accumulated on [t_from, t_to]."""
    if t_to == t_from:
        return 0.0
    D = motion.physics.D

    def integrand(z):
        L = _kinematics(motion, z)[0]
        return potential_value(motion, z) ** (2.0 / 3.0) / L ** 2

    val, _ = quad(integrand, t_from, t_to, **_QUAD_OPTS)
    return _SLOPE_SUM * D * val


def subsolution(motion: BoundaryMotion, xi, t: float, t_ref: float) -> np.ndarray:
    """Glued Airy barrier a(t) * wbar(xi, t), valid for t >= t_ref (the onset)."""
    if t < t_ref:
        raise ValueError(f"barrier is only defined from its onset t_ref={t_ref}")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    val = _barrier_profile(motion, xi, t)[0]
    return val * math.exp(_gauge_log(motion, t_ref, t))


def radial_subsolution(motion: BoundaryMotion, r, t: float, n_dim: int,
                       t_ref: float) -> np.ndarray:
    """Ball barrier wtilde(R0 - r, t) / r^((n-1)/2), vanishing near the centre.

    The division is harmless because the barrier is identically zero for
    r below R0 - xi*; two-sided critical bounds are only available for
    n_dim <= 3, where the curvature term has the right sign.
    """
    if n_dim not in (1, 2, 3):
        raise ValueError("radial barriers are only available for n_dim <= 3")
    if t < t_ref:
        raise ValueError(f"barrier is only defined from its onset t_ref={t_ref}")
    R0 = 0.5 * motion.L0
    if potential_value(motion, t) < _min_potential(0.5):
        raise ValueError("barrier does not fit in the half domain at this time")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    w1 = _barrier_profile(motion, R0 - r, t)[0]
    gauge = math.exp(_gauge_log(motion, t_ref, t))
    power = 0.5 * (n_dim - 1)
    out = np.zeros_like(r)
    mask = w1 > 0.0
    out[mask] = gauge * w1[mask] / r[mask] ** power
    return out


def radial_supersolution(motion: BoundaryMotion, r, t: float, n_dim: int) -> np.ndarray:
    """Principal-mode barrier h0(r/R0) exp(-D lambda0 s / R0^2) for the ball field."""
    _check_potential_sign(motion, t)
    R0 = 0.5 * motion.L0
    r_hat = np.atleast_1d(np.asarray(r, dtype=float)) / R0
    if n_dim == 1:
        h0, lam = np.cos(0.5 * np.pi * r_hat), np.pi ** 2 / 4.0
    elif n_dim == 2:
        h0, lam = j0(_BESSEL_J0_ZERO * r_hat), _BESSEL_J0_ZERO ** 2
    elif n_dim == 3:
        arg = np.pi * r_hat
        h0 = np.where(arg > 1e-8, np.sin(np.maximum(arg, 1e-300)) / np.maximum(arg, 1e-300),
                      1.0 - arg ** 2 / 6.0)
        lam = np.pi ** 2
    else:
        raise ValueError("radial barriers are only available for n_dim <= 3")
    s = time_rescale(motion, t)
    return h0 * math.exp(-motion.physics.D * lam * s / R0 ** 2)


# ---------------------------------------------------------------------------
# residual sign checks


def _potential_term(motion: BoundaryMotion, xi: np.ndarray, t: float) -> np.ndarray:
    """Zeroth-order coefficient of the potential-form equation at (xi, t)."""
    L, _, Lddot = _kinematics(motion, t)[:3]
    L0 = motion.L0
    return (Lddot * L / (4.0 * motion.physics.D)) * (xi / L0) * (xi / L0 - 1.0)


def supersolution_residual(motion: BoundaryMotion, xi, t: float) -> np.ndarray:
    """time-derivative minus spatial operator for the sine barrier; >= 0 when P >= 0."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    # The diffusion part cancels exactly, leaving minus the potential term.
    return -_potential_term(motion, xi, t) * supersolution(motion, xi, t)


def subsolution_residual(motion: BoundaryMotion, xi, t: float,
                         t_ref: float) -> np.ndarray:
    """time-derivative minus spatial operator for the Airy barrier.

    Must be <= 0 wherever the barrier is positive.  Points in the dead region
    are reported as exactly zero.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    val, der, der2, P, _ = _barrier_profile(motion, xi, t)
    L, _, _ = _kinematics(motion, t)[:3]
    D = motion.physics.D
    d_eff = D * (motion.L0 / L) ** 2
    pdot = potential_rate(motion, t)
    gauge_rate = _SLOPE_SUM * D * P ** (2.0 / 3.0) / L ** 2
    dt_part = (pdot / (3.0 * P)) * (xi * der - val) + gauge_rate * val
    residual = dt_part - d_eff * der2 - _potential_term(motion, xi, t) * val
    return np.where(val > 0.0, residual * math.exp(_gauge_log(motion, t_ref, t)), 0.0)


# ---------------------------------------------------------------------------
# envelope verification against a finite-difference run


@dataclass(frozen=True)
class EnvelopePair:
    """Calibrated barriers sandwiching a computed potential-form field."""

    times: np.ndarray
    grid: np.ndarray
    lower: np.ndarray          # C1 * subsolution at each (time, node)
    upper: np.ndarray          # C2 * supersolution at each (time, node)
    field: np.ndarray
    C1: float
    C2: float
    t_cal: float
    onset: float
    worst_slack: float
    worst_time: float
    worst_xi: float


def _barrier_pair(motion, grid, t, t_ref, kind, n_dim):
    if kind == "radial":
        return (radial_subsolution(motion, grid, t, n_dim, t_ref),
                radial_supersolution(motion, grid, t, n_dim))
    return subsolution(motion, grid, t, t_ref), supersolution(motion, grid, t)


def verify_envelope(motion: BoundaryMotion, solution: GridSolution,
                    t_cal: float | None = None, slack_tol: float = 1e-8) -> EnvelopePair:
    """Calibrate barriers at one snapshot and check them at all later ones.

    C2 scales the supersolution up to touch the field at t_cal; C1 scales the
    subsolution down likewise.  At every later output time the field must stay
    between the scaled barriers, up to slack_tol relative to the field's sup
    norm; a deeper violation raises EnvelopeViolationError with its location.
    """
    if solution.kind not in ("w", "radial"):
        raise ValueError(f"envelopes apply to potential-form runs, not {solution.kind!r}")
    if solution.motion_hash != motion_content_hash(motion):
        raise ValueError("solution was computed for a different motion")
    kind = solution.kind
    n_dim = solution.n_dim
    t_end = float(solution.times[-1])
    onset = subsolution_onset(motion, t_end, radial=(kind == "radial"))
    if t_cal is None:
        later = solution.times[solution.times >= onset - 1e-12]
        if later.size < 2:
            raise ValueError(
                f"no room to verify: barrier onset {onset:.4g} leaves fewer than "
                "two output times")
        t_cal = float(later[0])
    elif t_cal < onset:
        raise ValueError(f"t_cal={t_cal} precedes the barrier onset {onset:.4g}")

    grid = solution.grid
    interior = slice(1, -1)
    cal_idx = int(np.argmin(np.abs(solution.times - t_cal)))
    w_cal = solution.values[cal_idx]
    sub_cal, sup_cal = _barrier_pair(motion, grid, t_cal, onset, kind, n_dim)
    pos = sup_cal[interior] > 0.0
    C2 = float(np.max(w_cal[interior][pos] / sup_cal[interior][pos]))
    mask = sub_cal > 1e-14 * np.max(sub_cal)
    if not np.any(mask):
        raise ValueError("subsolution vanished on the whole grid at t_cal")
    C1 = float(np.min(w_cal[mask] / sub_cal[mask]))
    if C1 <= 0.0:
        raise ValueError(
            "field is not positive where the subsolution lives at t_cal; "
            "calibration impossible")

    check = [i for i, t in enumerate(solution.times) if t >= t_cal - 1e-12]
    lower = np.empty((len(check), grid.size))
    upper = np.empty_like(lower)
    field = np.empty_like(lower)
    worst = np.inf
    worst_t = worst_xi = float("nan")
    for row, i in enumerate(check):
        t = float(solution.times[i])
        sub_t, sup_t = _barrier_pair(motion, grid, t, onset, kind, n_dim)
        lower[row] = C1 * sub_t
        upper[row] = C2 * sup_t
        field[row] = solution.values[i]
        scale = float(np.max(np.abs(field[row])))
        if scale == 0.0:
            continue
        slack_up = (upper[row] - field[row]) / scale
        slack_lo = (field[row] - lower[row]) / scale
        for slack in (slack_up, slack_lo):
            j = int(np.argmin(slack))
            if slack[j] < worst:
                worst, worst_t, worst_xi = float(slack[j]), t, float(grid[j])
    pair = EnvelopePair(np.asarray([solution.times[i] for i in check]), grid,
                        lower, upper, field, C1, C2, float(t_cal), onset,
                        worst, worst_t, worst_xi)
    if worst < -slack_tol:
        raise EnvelopeViolationError(
            f"envelope violated: slack {worst:.3e} at t={worst_t:.6g}, "
            f"coordinate {worst_xi:.6g}")
    return pair


def envelope_to_csv(pair: EnvelopePair, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "xi", "lower", "field", "upper", "slack"])
        for i, t in enumerate(pair.times):
            scale = max(float(np.max(np.abs(pair.field[i]))), 1e-300)
            for j, xi in enumerate(pair.grid):
                slack = min(pair.upper[i, j] - pair.field[i, j],
                            pair.field[i, j] - pair.lower[i, j]) / scale
                writer.writerow(["%.17g" % v for v in
                                 (t, xi, pair.lower[i, j], pair.field[i, j],
                                  pair.upper[i, j], slack)])


# ---------------------------------------------------------------------------
# boundary gradient and exponent fit


def boundary_gradient(motion: BoundaryMotion, solution: GridSolution) -> tuple[np.ndarray, np.ndarray]:
    """Physical-space gradient of psi at the moving boundary for each output time.

    The shape factor is flat at the endpoint, so the gradient reduces to the
    one-sided slope of the stored field times (L0/L)^(3/2) (interval) or the
    matching ball power, times the shared time factor.
    """
    if solution.kind not in ("w", "radial"):
        raise ValueError(f"gradient trace applies to potential-form runs, not {solution.kind!r}")
    grid = solution.grid
    h = grid[1] - grid[0]
    out = np.empty(solution.times.size)
    L0 = motion.L0
    for i, t in enumerate(solution.times):
        t = float(t)
        state = eval_motion(motion, t)
        ltf = log_time_factor(motion, t)
        if solution.kind == "w":
            slope = (4.0 * solution.values[i, 1] - solution.values[i, 2]) / (2.0 * h)
            out[i] = slope * (L0 / state.L) ** 1.5 * math.exp(ltf)
        else:
            vals = solution.values[i]
            slope = (3.0 * vals[-1] - 4.0 * vals[-2] + vals[-3]) / (2.0 * h)
            R0 = 0.5 * L0
            R = 0.5 * state.L
            out[i] = -slope * (R0 / R) ** (0.5 * solution.n_dim + 1.0) * math.exp(ltf)
    return np.asarray(solution.times, dtype=float), out


@dataclass(frozen=True)
class CriticalFitReport:
    """Result of fitting the power-law decay of psi near the moving boundary."""

    route: str
    n_dim: int
    alpha: float
    predicted_exponent: float
    fitted_exponent: float
    per_probe: tuple
    probes: tuple
    window: tuple
    t_final: float
    grid_size: int
    dt: float
    residual_rms: float

    @property
    def error(self) -> float:
        return self.fitted_exponent - self.predicted_exponent


def fit_report_document(report: CriticalFitReport) -> dict:
    return {
        "schema_version": 1,
        "route": report.route,
        "n_dim": report.n_dim,
        "alpha": report.alpha,
        "predicted_exponent": report.predicted_exponent,
        "fitted_exponent": report.fitted_exponent,
        "error": report.error,
        "per_probe": list(report.per_probe),
        "probes": list(report.probes),
        "window": list(report.window),
        "t_final": report.t_final,
        "grid_size": report.grid_size,
        "dt": report.dt,
        "residual_rms": report.residual_rms,
    }


def _probe_log_psi(motion, solution, y, times):
    """log psi(boundary + y, t) reassembled from a potential-form snapshot."""
    out = np.empty(times.size)
    D = motion.physics.D
    L0 = motion.L0
    for i, t in enumerate(times):
        t = float(t)
        state = eval_motion(motion, t)
        idx = int(np.argmin(np.abs(solution.times - t)))
        spline = CubicSpline(solution.grid, solution.values[idx])
        ltf = log_time_factor(motion, t)
        if solution.kind == "w":
            xi_y = y * L0 / state.L
            w_val = float(spline(xi_y))
            log_extra = 0.5 * math.log(L0 / state.L) \
                + y * (1.0 - y / state.L) * state.Ldot / (4.0 * D)
        else:
            R = 0.5 * state.L
            R0 = 0.5 * L0
            r_y = (R - y) * R0 / R
            w_val = float(spline(r_y))
            Rdot = 0.5 * state.Ldot
            log_extra = 0.5 * solution.n_dim * math.log(R0 / R) \
                - Rdot * R * (r_y ** 2 - R0 ** 2) / (4.0 * D * R0 ** 2)
        if w_val <= 0.0:
            raise RuntimeError(
                f"probe value nonpositive at t={t:.6g}, offset y={y}; cannot fit a log slope")
        out[i] = math.log(w_val) + ltf + log_extra
    return out


def fit_exponent(motion: BoundaryMotion, n_dim: int = 1,
                 probes=(0.5, 1.0, 2.0), t_final: float = 1e3,
                 window: tuple | None = None, grid_size: int = 1024,
                 dt: float = 2e-3, num_outputs: int = 81,
                 theta: float = 0.5,
                 solution: GridSolution | None = None) -> CriticalFitReport:
    """Fit the decay exponent of psi at fixed offsets behind the moving boundary.

    For critical motions this runs the potential-form solver, reassembles
    psi(A + y, t) at each probe offset y, and regresses log psi on log t over
    the fit window (default: the last 1.5 decades before t_final).  The
    prediction is -1 - n/2 + alpha c* / 2D.

    For the balanced linearly-spreading configuration the exact single-mode
    series replaces the solver and the prediction is the diffusive -3/2.
    """
    ph = motion.physics
    if window is None:
        window = (t_final / 10 ** 1.5, t_final)
    if window[0] >= window[1] or window[1] > t_final * (1.0 + 1e-12):
        raise ValueError(f"fit window {window} must sit inside (0, t_final]")
    if math.log10(window[1] / window[0]) < 1.5 - 1e-9:
        raise ValueError("fit window must span at least 1.5 decades")

    if isinstance(motion, CriticalMotion):
        route = "numeric"
        alpha = motion.alpha
        predicted = -1.0 - 0.5 * n_dim + alpha * ph.c_star / (2.0 * ph.D)
        if solution is None:
            outputs = np.unique(np.concatenate(
                [[0.0], np.geomspace(max(10.0 * dt, 1e-2), t_final, num_outputs)]))
            if n_dim == 1:
                w0 = lambda xi: np.sin(np.pi * xi / motion.L0)
                solution = solve_w(motion, w0, grid_size=grid_size, dt=dt,
                                   T=t_final, output_times=outputs, theta=theta)
            else:
                R0 = 0.5 * motion.L0
                W0 = lambda r: np.cos(0.5 * np.pi * r / R0)
                solution = solve_radial(motion, W0, n_dim, grid_size=grid_size,
                                        dt=dt, T=t_final, output_times=outputs,
                                        theta=theta)
        else:
            if solution.motion_hash != motion_content_hash(motion):
                raise ValueError("solution was computed for a different motion")
            grid_size = solution.grid_size
            dt = solution.dt
        times = solution.times[(solution.times >= window[0]) & (solution.times <= window[1])]
        if times.size < 8:
            raise ValueError(
                f"only {times.size} output times fall in the fit window; need >= 8")
        slopes = []
        resid_sq = 0.0
        n_res = 0
        for y in probes:
            logs = _probe_log_psi(motion, solution, float(y), times)
            coeffs, res = np.polynomial.polynomial.polyfit(
                np.log(times), logs, 1, full=True)
            slopes.append(float(coeffs[1]))
            if res[0].size:
                resid_sq += float(res[0][0])
                n_res += times.size
        fitted = float(np.mean(slopes))
        rms = math.sqrt(resid_sq / max(n_res, 1))
        return CriticalFitReport(route, n_dim, alpha, predicted, fitted,
                                 tuple(slopes), tuple(float(y) for y in probes),
                                 (float(window[0]), float(window[1])), float(t_final),
                                 grid_size, dt, rms)

    # balanced spreading interval: exact series, no solver
    if n_dim != 1:
        raise ValueError("the series route is one-dimensional")
    tag = classify(motion)
    if tag.kind is not CaseKind.LINEAR_LENGTH:
        raise ValueError("series route needs a linearly spreading interval")
    slope = motion.b / motion.L0
    if (abs(slope - 2.0 * ph.c_star) > 1e-9 * ph.c_star
            or abs(motion.c + ph.c_star) > 1e-9 * ph.c_star
            or motion.gamma1 != 0.0):
        raise ValueError(
            "series route needs the balanced configuration: both endpoints "
            "receding at the free speed c*")
    route = "series"
    predicted = -1.5
    eig = solve_sl(ph.D, motion.L0, motion.gamma0, 0.0, grid_size=1024,
                   num_modes=4, extrapolate=True)
    coeffs = np.zeros(eig.num_modes)
    coeffs[0] = 1.0
    sol = SeriesSolution(motion, eig, coeffs)
    times = np.geomspace(window[0], window[1], 33)
    logs = []
    for y in probes:
        vals = np.array([float(eval_physical(sol, np.array([eval_motion(motion, t).A + y]),
                                             float(t))[0]) for t in times])
        if np.any(vals <= 0.0):
            raise RuntimeError(f"probe value nonpositive for offset y={y}")
        logs.append(np.log(vals))
    slopes = []
    resid_sq = 0.0
    for lg in logs:
        coeffs_fit, res = np.polynomial.polynomial.polyfit(np.log(times), lg, 1, full=True)
        slopes.append(float(coeffs_fit[1]))
        if res[0].size:
            resid_sq += float(res[0][0])
    fitted = float(np.mean(slopes))
    rms = math.sqrt(resid_sq / (len(probes) * times.size))
    return CriticalFitReport(route, 1, 0.0, predicted, fitted, tuple(slopes),
                             tuple(float(y) for y in probes),
                             (float(window[0]), float(window[1])), float(t_final),
                             0, 0.0, rms)


# ---------------------------------------------------------------------------
# one-sided comparison series for general motions


def verify_nested(inner: BoundaryMotion, outer: BoundaryMotion,
                  t_max: float, samples: int = 256) -> None:
    """Check that the inner domain stays inside the outer one up to t_max."""
    for t in np.linspace(0.0, t_max, samples):
        si = eval_motion(inner, float(t))
        so = eval_motion(outer, float(t))
        if si.A < so.A - 1e-12 or si.A + si.L > so.A + so.L + 1e-12:
            raise ValueError(
                f"domains are not nested at t={t:.6g}: "
                f"[{si.A:.6g}, {si.A + si.L:.6g}] vs [{so.A:.6g}, {so.A + so.L:.6g}]")


@dataclass(frozen=True)
class BoundSeries:
    """One-sided comparison series: frozen-potential modes, true motion factors."""

    motion: BoundaryMotion
    eigen: object
    coeffs: np.ndarray
    side: str                   # "lower" or "upper"

    @property
    def sigma1(self) -> float:
        return float(self.eigen.sigmas[0])


def eval_bound(bound: BoundSeries, xi, t: float) -> np.ndarray:
    """Evaluate a comparison series in scaled coordinates at time t."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    motion = bound.motion
    state = eval_motion(motion, t)
    s = state.s
    log_pre = log_time_factor(motion, t) + log_shape_factor(motion, xi, t, state)
    eig = bound.eigen
    total = np.zeros((xi.size,))
    for n in range(eig.num_modes):
        g = CubicSpline(eig.grid, eig.modes[n])(xi)
        total += bound.coeffs[n] * g * np.exp(eig.sigmas[n] * s + log_pre)
    return total


def envelope_bounds_general(motion: BoundaryMotion, u0,
                            gamma0_lo: float, gamma0_hi: float,
                            gamma1_lo: float, gamma1_hi: float,
                            t_max: float, grid_size: int = 512,
                            num_modes: int = 32,
                            n_check: int = 1000, rng=None) -> tuple:
    """Comparison series from pinched potential coefficients.

    Validates at n_check random times that the motion's instantaneous
    coefficients Lddot L^3 and Addot L^3 stay inside the supplied brackets,
    then builds two frozen Sturm-Liouville systems (one per corner) sharing
    the initial expansion of u0.  Evaluated with the true motion's time
    rescaling and exponential factors, they bound the solution one-sidedly.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    D = motion.physics.D
    L0 = motion.L0
    scale0 = max(abs(gamma0_lo), abs(gamma0_hi), 1.0)
    scale1 = max(abs(gamma1_lo), abs(gamma1_hi), 1.0)
    worst = (0.0, 0.0, "")
    for t in rng.uniform(0.0, t_max, n_check):
        L, _, Lddot, _, _, Addot = _kinematics(motion, float(t))
        g0 = Lddot * L ** 3
        g1 = Addot * L ** 3
        for val, lo, hi, scale, name in ((g0, gamma0_lo, gamma0_hi, scale0, "Lddot L^3"),
                                         (g1, gamma1_lo, gamma1_hi, scale1, "Addot L^3")):
            breach = max(lo - val, val - hi) / scale
            if breach > worst[0]:
                worst = (breach, float(t), name)
    if worst[0] > 1e-9:
        raise ValueError(
            f"potential coefficients escape the brackets: {worst[2]} at "
            f"t={worst[1]:.6g} by relative margin {worst[0]:.3e}")

    grid = np.linspace(0.0, L0, grid_size + 1)
    u0_vals = np.asarray(u0(grid), dtype=float)
    w0 = initial_w_from_u(motion, grid, u0_vals)
    bounds = []
    for side, g0, g1 in (("lower", gamma0_lo, gamma1_lo), ("upper", gamma0_hi, gamma1_hi)):
        eig = solve_sl(D, L0, g0, g1, grid_size=grid_size, num_modes=num_modes)
        coeffs = eig.modes @ (eig.weights * w0)
        bounds.append(BoundSeries(motion, eig, coeffs, side))
    return bounds[0], bounds[1]
