"""Series solutions of the growth-diffusion equation on separable moving domains.

For length laws L^2 = a t^2 + 2 b t + L0^2 with endpoint acceleration
gamma1 / L^3 the transformed problem separates: the solution is a sum of
Sturm-Liouville modes g_n(xi) carried by exp(sigma_n s(t)) and multiplied by
an explicit exponential prefactor.  Each closed-form case (fixed, linear,
square-root and quadratic-in-time length) has its own reduction of the two
prefactor integrals; the ``generic`` evaluation route instead computes both
integrals by adaptive quadrature.  The two routes are algebraically identical,
so their agreement is a strong transcription check and is enforced in the
test suite at relative 1e-9.

Radially symmetric balls |x| < R(t) with R^2 quadratic in t separate the same
way; ``build_radial_series`` handles those with a fixed centre.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .eigen import EigenSystem, solve_radial, solve_sl
from .motion import (
    BoundaryMotion,
    CaseKind,
    DomainCollapsedError,
    SeparableMotion,
    classify,
    eval_motion,
    motion_content_hash,
    motion_to_document,
    time_rescale,
    validity_horizon,
    _kinematics,
)
from .transforms import (
    drift_integral,
    initial_w_from_u,
    log_shape_factor,
    xi_from_x,
)

__all__ = [
    "TruncationWarning",
    "FieldSample",
    "SeriesSolution",
    "RadialSeriesSolution",
    "GrowthVerdict",
    "transform_ic",
    "expand",
    "build_series",
    "eval_w",
    "eval_series",
    "eval_physical",
    "build_radial_series",
    "eval_radial_series",
    "eval_radial_physical",
    "growth_region",
    "series_sup_norm",
    "series_to_csv",
    "series_manifest",
]

_QUAD_OPTS = {"epsabs": 1e-12, "epsrel": 1e-12, "limit": 400}

# A mode tail larger than this fraction of the total triggers TruncationWarning.
_TAIL_RTOL = 1e-8


class TruncationWarning(UserWarning):
    """The last retained mode still contributes visibly to the series."""


@dataclass(frozen=True)
class FieldSample:
    """One evaluated field value in a chosen representation."""

    x: float
    xi: float
    t: float
    value: float
    representation: str

    def __post_init__(self) -> None:
        if self.representation not in ("psi", "u", "w"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite sample value {self.value}")


@dataclass(frozen=True)
class SeriesSolution:
    """Mode expansion of one initial condition over one separable motion."""

    motion: SeparableMotion
    eigen: EigenSystem
    coeffs: np.ndarray

    @property
    def physics(self):
        return self.motion.physics

    @property
    def truncation(self) -> int:
        return len(self.coeffs)

    @cached_property
    def horizon(self) -> float:
        return validity_horizon(self.motion)

    @cached_property
    def _mode_splines(self):
        return [CubicSpline(self.eigen.grid, m) for m in self.eigen.modes]


@dataclass(frozen=True)
class RadialSeriesSolution:
    """Mode expansion for a radially symmetric ball with fixed centre."""

    motion: SeparableMotion
    eigen: EigenSystem
    coeffs: np.ndarray
    n_dim: int

    @property
    def physics(self):
        return self.motion.physics

    @property
    def truncation(self) -> int:
        return len(self.coeffs)

    @cached_property
    def horizon(self) -> float:
        return validity_horizon(self.motion)

    @cached_property
    def _mode_splines(self):
        return [CubicSpline(self.eigen.grid, m) for m in self.eigen.modes]


def transform_ic(motion: BoundaryMotion, xi, u0_values) -> np.ndarray:
    """Map initial data u(xi, 0) to w(xi, 0); the data must vanish at both ends."""
    xi = np.asarray(xi, dtype=float)
    u0 = np.asarray(u0_values, dtype=float)
    if u0.shape != xi.shape:
        raise ValueError(f"u0 has shape {u0.shape}, grid has shape {xi.shape}")
    scale = np.max(np.abs(u0)) or 1.0
    if abs(u0[0]) > 1e-12 * scale or abs(u0[-1]) > 1e-12 * scale:
        raise ValueError("initial data must vanish at both interval endpoints")
    return initial_w_from_u(motion, xi, u0)


def expand(w0_values, eigen: EigenSystem) -> np.ndarray:
    """Mode coefficients of grid data w0 against the eigensystem's quadrature rule."""
    w0 = np.asarray(w0_values, dtype=float)
    if w0.shape != eigen.grid.shape:
        raise ValueError(f"w0 has {w0.size} values, eigen grid has {eigen.grid.size}")
    return eigen.modes @ (eigen.weights * w0)


def build_series(motion: SeparableMotion, u0, grid_size: int = 512,
                 num_modes: int = 32, extrapolate: bool = False) -> SeriesSolution:
    """Expand initial data u0 (callable or node values) into a SeriesSolution.

    ``extrapolate`` Richardson-corrects the eigenvalues; worthwhile whenever
    the solution is needed at times where exp(sigma_n t) amplifies the O(h^2)
    eigenvalue bias beyond the target accuracy.
    """
    tag = classify(motion)
    if tag.kind in (CaseKind.CRITICAL_CASE, CaseKind.GENERAL):
        raise ValueError(f"series solutions need a separable motion, got {tag.kind.value}")
    eig = solve_sl(motion.physics.D, motion.L0, motion.gamma0, motion.gamma1,
                   grid_size=grid_size, num_modes=num_modes, extrapolate=extrapolate)
    u0_vals = np.asarray(u0(eig.grid) if callable(u0) else u0, dtype=float)
    w0 = transform_ic(motion, eig.grid, u0_vals)
    return SeriesSolution(motion, eig, expand(w0, eig))


# ---------------------------------------------------------------------------
# evaluation


def _check_time(sol, t: float) -> None:
    if t < 0.0:
        raise ValueError(f"series solutions are defined for t >= 0, got t={t}")
    if t >= sol.horizon:
        raise DomainCollapsedError(
            f"t={t} is at or beyond the collapse time {sol.horizon}")


def _reference_xi(sol, xi) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    L0 = sol.motion.L0
    tol = 1e-12 * L0
    if np.any(xi < -tol) or np.any(xi > L0 + tol):
        raise ValueError(f"xi must lie in [0, {L0}]")
    return np.clip(xi, 0.0, L0)


def _sum_modes(sol, xi: np.ndarray, log_theta: np.ndarray,
               extra_log=0.0) -> np.ndarray:
    """Sum c_n * exp(log_theta_n + extra_log) * g_n(xi) with a tail check.

    ``extra_log`` is the xi-dependent (or scalar) log-prefactor; folding it
    into the exponent keeps individual terms finite even when the prefactor
    alone would overflow.
    """
    g = np.array([sp(xi) for sp in sol._mode_splines])
    amp = sol.coeffs[:, None] * np.exp(log_theta[:, None] + extra_log)
    terms = amp * g
    total = terms.sum(axis=0)
    tail = np.abs(terms[-1])
    floor = 1e-12 * np.max(np.abs(total), initial=0.0)
    with np.errstate(invalid="ignore"):
        bad = tail > _TAIL_RTOL * np.maximum(np.abs(total), floor)
    if np.any(bad & (tail > 0.0)):
        warnings.warn(
            f"mode {sol.truncation} still contributes more than {_TAIL_RTOL:g} "
            "of the series; increase num_modes", TruncationWarning, stacklevel=3)
    return total


def _quad_s(motion: BoundaryMotion, t: float) -> float:
    """Rescaled time by direct quadrature, independent of the closed forms."""
    if t == 0.0:
        return 0.0
    L0sq = motion.L0 ** 2
    val, _ = quad(lambda z: L0sq / _kinematics(motion, z)[0] ** 2, 0.0, t, **_QUAD_OPTS)
    return val


def _closed_drift(motion: SeparableMotion, t: float, L: float, s: float) -> float:
    """Closed form of integral Adot^2 / 4D over [0, t] for each separable case."""
    D = motion.physics.D
    L0, g1, c = motion.L0, motion.gamma1, motion.c
    kind = classify(motion).kind
    if kind is CaseKind.FIXED_LENGTH:
        acc = g1 * g1 * t ** 3 / (3.0 * L0 ** 6) + c * g1 * t * t / L0 ** 3 + c * c * t
    elif kind is CaseKind.LINEAR_LENGTH:
        slope = motion.b / L0
        acc = (c * c * t - c * g1 * t / (slope * L0 * L)
               + (g1 * g1 / (12.0 * slope ** 3)) * (1.0 / L0 ** 3 - 1.0 / L ** 3))
    elif kind is CaseKind.SQRT_LENGTH:
        rho = motion.b
        acc = (c * c * t - 2.0 * c * g1 * (L - L0) / rho ** 2
               + (g1 * g1 / rho ** 3) * math.log(L / L0))
    else:
        beta = motion.b ** 2 - motion.a * L0 ** 2
        acc = ((c * c + g1 * g1 * motion.a / beta ** 2) * t
               - 2.0 * c * g1 * (L - L0) / beta
               + (g1 * g1 / (beta * L0 ** 2)) * s)
    return acc / (4.0 * D)


def eval_w(sol: SeriesSolution, xi, t: float, route: str = "fast") -> np.ndarray:
    """Potential-form field w(xi, t) = sum c_n exp(sigma_n s(t)) g_n(xi)."""
    _check_time(sol, t)
    xi = _reference_xi(sol, xi)
    s = time_rescale(sol.motion, t) if route == "fast" else _quad_s(sol.motion, t)
    return _sum_modes(sol, xi, sol.eigen.sigmas * s)


def eval_series(sol: SeriesSolution, xi, t: float, route: str = "fast") -> np.ndarray:
    """Fixed-domain field u(xi, t).

    route="fast" uses the per-case closed forms of s(t) and the drift
    integral; route="generic" computes both by quadrature.  Anything else is
    rejected.
    """
    if route not in ("fast", "generic"):
        raise ValueError(f"unknown route {route!r}")
    _check_time(sol, t)
    xi = _reference_xi(sol, xi)
    m = sol.motion
    state = eval_motion(m, t)
    if route == "fast":
        s = state.s
        drift = _closed_drift(m, t, state.L, s)
    else:
        s = _quad_s(m, t)
        drift = drift_integral(m, t)
    log_pre = m.physics.f0 * t - drift + log_shape_factor(m, xi, t, state)
    return _sum_modes(sol, xi, sol.eigen.sigmas * s, log_pre)


def eval_physical(sol: SeriesSolution, x, t: float, route: str = "fast") -> np.ndarray:
    """Physical density psi(x, t); x must lie inside the moving interval."""
    _check_time(sol, t)
    state = eval_motion(sol.motion, t)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tol = 1e-12 * max(sol.motion.L0, state.L)
    if np.any(x < state.A - tol) or np.any(x > state.A + state.L + tol):
        raise ValueError(
            f"position outside the moving interval [{state.A}, {state.A + state.L}] "
            f"at t={t}")
    return eval_series(sol, xi_from_x(sol.motion, x, t, state), t, route)


def series_sup_norm(sol: SeriesSolution, t: float, n_samples: int = 513) -> float:
    """Max of |u(., t)| over a uniform xi sample."""
    xi = np.linspace(0.0, sol.motion.L0, n_samples)
    return float(np.max(np.abs(eval_series(sol, xi, t))))


# ---------------------------------------------------------------------------
# radially symmetric ball with fixed centre


def _is_centered_separable(motion: SeparableMotion) -> bool:
    """True when the motion keeps the interval centred at the origin."""
    g0 = motion.gamma0
    L0 = motion.L0
    scale = max(abs(g0), abs(motion.b) / L0, 1e-30)
    if g0 == 0.0:
        return (motion.gamma1 == 0.0
                and abs(motion.c + 0.5 * motion.b / L0) <= 1e-12 * scale
                and abs(motion.d + 0.5 * L0) <= 1e-12 * L0)
    return (abs(motion.gamma1 + 0.5 * g0) <= 1e-12 * abs(g0)
            and motion.c == 0.0 and motion.d == 0.0)


def build_radial_series(motion: SeparableMotion, psi0, n_dim: int,
                        grid_size: int = 512, num_modes: int = 32,
                        extrapolate: bool = False) -> RadialSeriesSolution:
    """Expand radial initial data psi0(r) on the ball of diameter L(t).

    ``motion`` describes the diameter: the ball radius is R = L/2 and the
    motion must be centred (A = -L/2), which pins gamma1, c and d.  Only the
    radially symmetric sector is expanded.
    """
    if not isinstance(motion, SeparableMotion):
        raise ValueError("radial series need a separable diameter motion")
    if not _is_centered_separable(motion):
        raise ValueError("radial series need a centred motion; "
                         "build it with SeparableMotion.symmetric")
    R0 = 0.5 * motion.L0
    eig = solve_radial(motion.physics.D, R0, motion.gamma0 / 16.0, n_dim,
                       grid_size=grid_size, num_modes=num_modes, extrapolate=extrapolate)
    r = eig.grid
    psi0_vals = np.asarray(psi0(r) if callable(psi0) else psi0, dtype=float)
    if psi0_vals.shape != r.shape:
        raise ValueError(f"psi0 has shape {psi0_vals.shape}, grid has {r.shape}")
    scale = np.max(np.abs(psi0_vals)) or 1.0
    if abs(psi0_vals[-1]) > 1e-12 * scale:
        raise ValueError("initial data must vanish on the ball boundary")
    L, Ldot = _kinematics(motion, 0.0)[:2]
    # W = psi exp(Rdot R r^2 / (4 D R0^2)) at t = 0, with Rdot R = Ldot L / 4.
    log_fac = 0.25 * Ldot * L * r * r / (4.0 * motion.physics.D * R0 ** 2)
    w0 = psi0_vals * np.exp(log_fac)
    coeffs = eig.modes @ (eig.weights * w0)
    return RadialSeriesSolution(motion, eig, coeffs, n_dim)


def eval_radial_series(sol: RadialSeriesSolution, r, t: float) -> np.ndarray:
    """Physical density psi at reference radius r in [0, R0] (r maps to |x| R0/R)."""
    _check_time(sol, t)
    R0 = 0.5 * sol.motion.L0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    tol = 1e-12 * R0
    if np.any(r < -tol) or np.any(r > R0 + tol):
        raise ValueError(f"reference radius must lie in [0, {R0}]")
    r = np.clip(r, 0.0, R0)
    state = eval_motion(sol.motion, t)
    D = sol.physics.D
    RdotR = 0.25 * state.Ldot * state.L
    log_pre = (0.5 * sol.n_dim * math.log(2.0 * R0 / state.L)
               + sol.physics.f0 * t
               - RdotR * r * r / (4.0 * D * R0 ** 2))
    return _sum_modes(sol, r, sol.eigen.sigmas * state.s, log_pre)


def eval_radial_physical(sol: RadialSeriesSolution, radius, t: float) -> np.ndarray:
    """Physical density at physical radius |x| = radius inside the ball."""
    _check_time(sol, t)
    state = eval_motion(sol.motion, t)
    R = 0.5 * state.L
    radius = np.atleast_1d(np.asarray(radius, dtype=float))
    if np.any(radius < 0.0) or np.any(radius > R * (1.0 + 1e-12)):
        raise ValueError(f"radius outside the ball of radius {R} at t={t}")
    return eval_radial_series(sol, radius * (0.5 * sol.motion.L0 / R), t)


# ---------------------------------------------------------------------------
# long-time growth verdicts


@dataclass(frozen=True)
class GrowthVerdict:
    """Long-time fate of solutions over one separable motion.

    kind is one of "collapse", "decay", "grow", "window", "marginal";
    ``window`` is the open xi-interval where the pointwise exponential rate is
    positive ("grow" means the window is all of (0, L0)); ``rate`` is the
    xi-independent part of that exponential rate when one exists.
    """

    kind: str
    window: tuple | None = None
    collapse_time: float | None = None
    rate: float | None = None
    note: str = ""


def _window_verdict(lo: float, hi: float, L0: float, note: str) -> GrowthVerdict:
    lo, hi = max(0.0, lo), min(L0, hi)
    if hi <= lo:
        return GrowthVerdict("decay", note=note + "; growth window is empty")
    if lo == 0.0 and hi == L0:
        return GrowthVerdict("grow", window=(0.0, L0), note=note)
    return GrowthVerdict("window", window=(lo, hi), note=note)


def growth_region(motion: SeparableMotion) -> GrowthVerdict:
    """Classify the long-time behaviour of u over a separable motion.

    The verdict follows the sign of the pointwise exponential rate
    f0 - (c_eff + xi * v / L0)^2 / 4D, where v is the asymptotic length
    growth speed and c_eff the asymptotic endpoint drift.
    """
    tag = classify(motion)
    if tag.kind in (CaseKind.CRITICAL_CASE, CaseKind.GENERAL):
        raise ValueError(f"growth verdicts need a separable motion, got {tag.kind.value}")
    horizon = validity_horizon(motion)
    if math.isfinite(horizon):
        return GrowthVerdict("collapse", collapse_time=horizon,
                             note="length vanishes in finite time; all modes die")
    ph = motion.physics
    cs = ph.c_star
    L0, g1, c = motion.L0, motion.gamma1, motion.c
    if tag.kind is CaseKind.FIXED_LENGTH:
        if g1 != 0.0:
            return GrowthVerdict(
                "decay", note="accelerating endpoints on a fixed length force "
                "super-exponential decay")
        rate = ph.f0 - ph.D * math.pi ** 2 / L0 ** 2 - c * c / (4.0 * ph.D)
        if rate > 0.0:
            return GrowthVerdict("grow", window=(0.0, L0), rate=rate,
                                 note="f0 exceeds the diffusive and drift losses")
        if rate < 0.0:
            return GrowthVerdict("decay", rate=rate,
                                 note="diffusive and drift losses exceed f0")
        return GrowthVerdict("marginal", rate=0.0,
                             note="f0 exactly balances the losses")
    if tag.kind is CaseKind.SQRT_LENGTH:
        rate = ph.f0 - c * c / (4.0 * ph.D)
        if rate > 0.0:
            return GrowthVerdict("grow", window=(0.0, L0), rate=rate,
                                 note="diffusive losses vanish; only drift competes with f0")
        if rate < 0.0:
            return GrowthVerdict("decay", rate=rate, note="endpoint drift beats f0")
        return GrowthVerdict("marginal", rate=0.0, note="drift exactly balances f0")
    if tag.kind is CaseKind.LINEAR_LENGTH:
        v = motion.b / L0
        return _window_verdict((L0 / v) * (-cs - c), (L0 / v) * (cs - c), L0,
                               "growth where the local frame speed stays below c*")
    # Quadratic length growth: v -> sqrt(a), endpoint drift -> c - gamma1 sqrt(a) / beta.
    v = math.sqrt(motion.a)
    beta = motion.b ** 2 - motion.a * L0 ** 2
    c_eff = c - g1 * v / beta
    return _window_verdict((L0 / v) * (-cs - c_eff), (L0 / v) * (cs - c_eff), L0,
                           "growth where the local frame speed stays below c*")


# ---------------------------------------------------------------------------
# export


def sample_field(sol: SeriesSolution, xi, t: float,
                 route: str = "fast") -> list[FieldSample]:
    """Evaluate psi, u and w at the given reference positions."""
    xi = _reference_xi(sol, xi)
    state = eval_motion(sol.motion, t)
    u = eval_series(sol, xi, t, route)
    w = eval_w(sol, xi, t, route)
    x = state.A + xi * (state.L / sol.motion.L0)
    out = []
    for j in range(xi.size):
        out.append(FieldSample(float(x[j]), float(xi[j]), t, float(u[j]), "psi"))
        out.append(FieldSample(float(x[j]), float(xi[j]), t, float(u[j]), "u"))
        out.append(FieldSample(float(x[j]), float(xi[j]), t, float(w[j]), "w"))
    return out


def series_to_csv(sol: SeriesSolution, path, xi, times,
                  route: str = "fast") -> None:
    """Write columns x, xi, t, psi, u, w; one row per (time, position)."""
    xi = _reference_xi(sol, xi)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "xi", "t", "psi", "u", "w"])
        for t in times:
            state = eval_motion(sol.motion, float(t))
            u = eval_series(sol, xi, float(t), route)
            w = eval_w(sol, xi, float(t), route)
            x = state.A + xi * (state.L / sol.motion.L0)
            for j in range(xi.size):
                writer.writerow([f"{v:.17g}" for v in
                                 (x[j], xi[j], t, u[j], u[j], w[j])])


def series_manifest(sol: SeriesSolution | RadialSeriesSolution) -> dict:
    """JSON-ready description of a series solution (no field data)."""
    doc = {
        "schema_version": 1,
        "motion": motion_to_document(sol.motion),
        "motion_hash": motion_content_hash(sol.motion),
        "truncation": sol.truncation,
        "grid_size": sol.eigen.grid_size,
        "sigmas": [float(v) for v in sol.eigen.sigmas],
    }
    if isinstance(sol, RadialSeriesSolution):
        doc["n_dim"] = sol.n_dim
    return doc
