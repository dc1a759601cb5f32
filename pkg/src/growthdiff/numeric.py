"""Finite-difference solvers for the growth-diffusion equation on moving domains.

Three forms are integrated on the fixed reference domain:

* ``solve_u``      -- advection-diffusion-growth form of u(xi, t) for any motion;
* ``solve_w``      -- potential form of w(xi, t) for centred motions (A = -L/2);
* ``solve_radial`` -- potential form of W(r, t) on a ball of diameter L(t).

All three use a theta-weighted implicit step (Crank-Nicolson by default) with
coefficients frozen at the half step, which keeps the scheme second order in
time even though the coefficients are time dependent.  Spatial discretisation
is the standard second-order stencil; the radial solver uses a conservative
finite-volume form whose r = 0 row encodes the regularity condition W'(0) = 0.

Solvers are deterministic: the same inputs produce bit-identical outputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .motion import (
    BoundaryMotion,
    DomainCollapsedError,
    motion_content_hash,
    validity_horizon,
    _kinematics,
)
from .transforms import require_centered

__all__ = [
    "GridSolution",
    "solve_u",
    "solve_w",
    "solve_radial",
    "grid_to_csv",
    "grid_manifest",
]


@dataclass(frozen=True)
class GridSolution:
    """Time slices of one finite-difference run on the reference domain."""

    kind: str              # "u", "w" or "radial"
    grid: np.ndarray       # reference nodes (xi, or r for the radial kind)
    times: np.ndarray      # output times, snapped to step multiples
    values: np.ndarray     # shape (len(times), len(grid))
    dt: float              # effective step actually used
    theta: float
    n_dim: int
    motion_hash: str

    @property
    def grid_size(self) -> int:
        return self.grid.size - 1

    def slice_at(self, t: float) -> np.ndarray:
        """Field values at one stored output time."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not an output time of this run")
        return self.values[i]


def _prepare_run(motion: BoundaryMotion, ic, grid: np.ndarray, dt: float,
                 T: float, output_times, theta: float):
    if not (dt > 0.0) or not (T > 0.0):
        raise ValueError("dt and T must be positive")
    if not (0.0 <= theta <= 1.0):
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if T >= validity_horizon(motion):
        raise DomainCollapsedError(
            f"T={T} reaches the collapse time {validity_horizon(motion)}")
    field0 = np.asarray(ic(grid) if callable(ic) else ic, dtype=float)
    if field0.shape != grid.shape:
        raise ValueError(f"initial data has shape {field0.shape}, grid has {grid.shape}")
    n_steps = max(1, int(round(T / dt)))
    dt_eff = T / n_steps
    if output_times is None:
        output_times = np.linspace(0.0, T, 11)
    out = np.asarray(output_times, dtype=float)
    if np.any(out < 0.0) or np.any(out > T * (1.0 + 1e-12)):
        raise ValueError("output times must lie in [0, T]")
    idx = sorted(set(int(round(t / dt_eff)) for t in out))
    return field0, n_steps, dt_eff, idx


def _apply_rows(low, diag, up, u):
    res = diag * u
    res[:-1] += up[:-1] * u[1:]
    res[1:] += low[1:] * u[:-1]
    return res


def _march(build_rows, field0, n_steps, dt, theta, out_idx, pin=()):
    """Advance (I - theta dt L) u_new = (I + (1-theta) dt L) u_old.

    ``pin`` lists Dirichlet rows; they are decoupled from the system, but the
    banded solve's pivoting smears roundoff into them, so they are re-zeroed
    after every step.
    """
    u = field0.copy()
    n = u.size
    snaps = []
    if out_idx and out_idx[0] == 0:
        snaps.append(u.copy())
    wanted = set(out_idx)
    ab = np.empty((3, n))
    ab[0, 0] = 0.0
    ab[2, -1] = 0.0
    for k in range(n_steps):
        low, diag, up = build_rows((k + 0.5) * dt)
        rhs = u + (1.0 - theta) * dt * _apply_rows(low, diag, up, u)
        ab[0, 1:] = -theta * dt * up[:-1]
        ab[1, :] = 1.0 - theta * dt * diag
        ab[2, :-1] = -theta * dt * low[1:]
        u = solve_banded((1, 1), ab, rhs, overwrite_ab=False, overwrite_b=True)
        for j in pin:
            u[j] = 0.0
        if (k + 1) in wanted:
            if not np.all(np.isfinite(u)):
                raise RuntimeError(f"solver produced non-finite values by t={(k + 1) * dt}")
            snaps.append(u.copy())
    return np.array(snaps)


def _check_explicit_stability(theta, dt, h, motion, T, extra=0.0):
    """For theta < 1/2 the scheme is conditionally stable; refuse unstable steps."""
    if theta >= 0.5:
        return
    worst = 0.0
    for t in np.linspace(0.0, T, 129):
        L = _kinematics(motion, float(t))[0]
        worst = max(worst, motion.physics.D * (motion.L0 / L) ** 2)
    limit = h * h / (2.0 * (1.0 - 2.0 * theta) * (worst + extra * h * h))
    if dt > limit:
        raise ValueError(
            f"explicit component unstable: dt={dt} exceeds the stability limit "
            f"{limit:.3e} for theta={theta}")


def solve_u(motion: BoundaryMotion, u0, grid_size: int = 512, dt: float = 1e-3,
            T: float = 1.0, output_times=None, theta: float = 0.5) -> GridSolution:
    """Integrate the advection-diffusion-growth form of u on [0, L0].

    Rejects runs whose cell Peclet number |V| h / D_eff exceeds 2 at any step:
    the centred advection stencil would lose its comparison structure there.
    """
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    L0 = motion.L0
    grid = np.linspace(0.0, L0, grid_size + 1)
    h = L0 / grid_size
    field0, n_steps, dt_eff, out_idx = _prepare_run(
        motion, u0, grid, dt, T, output_times, theta)
    scale = np.max(np.abs(field0)) or 1.0
    if abs(field0[0]) > 1e-12 * scale or abs(field0[-1]) > 1e-12 * scale:
        raise ValueError("initial data must vanish at both endpoints")
    field0[0] = field0[-1] = 0.0
    _check_explicit_stability(theta, dt_eff, h, motion, T)
    D, f0 = motion.physics.D, motion.physics.f0
    low = np.zeros(grid_size + 1)
    up = np.zeros(grid_size + 1)
    diag = np.zeros(grid_size + 1)

    def build_rows(t):
        L, Ldot, _, _, Adot, _ = _kinematics(motion, t)
        d_eff = D * (L0 / L) ** 2
        vel = (Adot * L0 + grid[1:-1] * Ldot) / L
        peclet = np.max(np.abs(vel)) * h / d_eff
        if peclet > 2.0:
            need = int(math.ceil(grid_size * peclet / 2.0)) + 1
            raise ValueError(
                f"cell Peclet number {peclet:.2f} exceeds 2 at t={t:.6g}; "
                f"increase grid_size to at least {need}")
        low[1:-1] = d_eff / h ** 2 - vel / (2.0 * h)
        diag[1:-1] = -2.0 * d_eff / h ** 2 + f0
        up[1:-1] = d_eff / h ** 2 + vel / (2.0 * h)
        return low, diag, up

    values = _march(build_rows, field0, n_steps, dt_eff, theta, out_idx, pin=(0, -1))
    times = np.array([i * dt_eff for i in out_idx])
    return GridSolution("u", grid, times, values, dt_eff, theta, 1,
                        motion_content_hash(motion))


def solve_w(motion: BoundaryMotion, w0, grid_size: int = 512, dt: float = 1e-3,
            T: float = 1.0, output_times=None, theta: float = 0.5) -> GridSolution:
    """Integrate the potential form of w on [0, L0]; needs a centred motion."""
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    require_centered(motion, T)
    L0 = motion.L0
    grid = np.linspace(0.0, L0, grid_size + 1)
    h = L0 / grid_size
    field0, n_steps, dt_eff, out_idx = _prepare_run(
        motion, w0, grid, dt, T, output_times, theta)
    scale = np.max(np.abs(field0)) or 1.0
    if abs(field0[0]) > 1e-12 * scale or abs(field0[-1]) > 1e-12 * scale:
        raise ValueError("initial data must vanish at both endpoints")
    field0[0] = field0[-1] = 0.0
    _check_explicit_stability(theta, dt_eff, h, motion, T)
    D = motion.physics.D
    shape = (grid[1:-1] / L0) * (grid[1:-1] / L0 - 1.0)
    low = np.zeros(grid_size + 1)
    up = np.zeros(grid_size + 1)
    diag = np.zeros(grid_size + 1)

    def build_rows(t):
        L, _, Lddot = _kinematics(motion, t)[:3]
        d_eff = D * (L0 / L) ** 2
        # D_eff * P(t) (xi/L0)(xi/L0 - 1) / L0^2 with P = Lddot L^3 / 4 D^2
        pot = (Lddot * L / (4.0 * D)) * shape
        low[1:-1] = d_eff / h ** 2
        diag[1:-1] = -2.0 * d_eff / h ** 2 + pot
        up[1:-1] = d_eff / h ** 2
        return low, diag, up

    values = _march(build_rows, field0, n_steps, dt_eff, theta, out_idx, pin=(0, -1))
    times = np.array([i * dt_eff for i in out_idx])
    return GridSolution("w", grid, times, values, dt_eff, theta, 1,
                        motion_content_hash(motion))


def _radial_volumes(grid: np.ndarray, h: float, n_dim: int) -> np.ndarray:
    lo = np.clip(grid - 0.5 * h, 0.0, None)
    hi = grid + 0.5 * h
    return (hi ** n_dim - lo ** n_dim) / n_dim


def solve_radial(motion: BoundaryMotion, W0, n_dim: int, grid_size: int = 512,
                 dt: float = 1e-3, T: float = 1.0, output_times=None,
                 theta: float = 0.5) -> GridSolution:
    """Integrate the radial potential form of W on [0, R0] with R = L/2.

    ``motion`` describes the ball diameter and must be centred.  The r = 0 row
    is the finite-volume regularity row; r = R0 is a Dirichlet row.
    """
    if n_dim not in (1, 2, 3):
        raise ValueError(f"n_dim must be 1, 2 or 3, got {n_dim}")
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    require_centered(motion, T)
    R0 = 0.5 * motion.L0
    grid = np.linspace(0.0, R0, grid_size + 1)
    h = R0 / grid_size
    field0, n_steps, dt_eff, out_idx = _prepare_run(
        motion, W0, grid, dt, T, output_times, theta)
    scale = np.max(np.abs(field0)) or 1.0
    if abs(field0[-1]) > 1e-12 * scale:
        raise ValueError("initial data must vanish on the ball boundary")
    field0[-1] = 0.0
    _check_explicit_stability(theta, dt_eff, h, motion, T)
    D = motion.physics.D
    mu = _radial_volumes(grid[:-1], h, n_dim)
    face_hi = (grid[:-1] + 0.5 * h) ** (n_dim - 1)
    face_lo = np.concatenate(([0.0], face_hi[:-1]))
    shape = grid[:-1] ** 2 / R0 ** 2 - 1.0
    low = np.zeros(grid_size + 1)
    up = np.zeros(grid_size + 1)
    diag = np.zeros(grid_size + 1)

    def build_rows(t):
        L, _, Lddot = _kinematics(motion, t)[:3]
        R = 0.5 * L
        d_eff = D * (R0 / R) ** 2
        # D_eff * Q(t) (r^2/R0^2 - 1) / R0^2 with Q = Rddot R^3 / 4 D^2
        pot = (0.25 * Lddot * L / (4.0 * D)) * shape
        up[:-1] = d_eff * face_hi / (mu * h)
        low[:-1] = d_eff * face_lo / (mu * h)
        diag[:-1] = -(up[:-1] + low[:-1]) + pot
        return low, diag, up

    values = _march(build_rows, field0, n_steps, dt_eff, theta, out_idx, pin=(-1,))
    times = np.array([i * dt_eff for i in out_idx])
    return GridSolution("radial", grid, times, values, dt_eff, theta, n_dim,
                        motion_content_hash(motion))


def grid_to_csv(solution: GridSolution, path) -> None:
    """Long-format CSV with columns t, xi, value (xi is the radius for radial runs)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "xi", "value"])
        for i, t in enumerate(solution.times):
            for j, x in enumerate(solution.grid):
                writer.writerow([f"{t:.17g}", f"{x:.17g}",
                                 f"{solution.values[i, j]:.17g}"])


def grid_manifest(solution: GridSolution) -> dict:
    """JSON-ready run description: scheme, sizes and the motion content hash."""
    return {
        "schema_version": 1,
        "kind": solution.kind,
        "scheme": "theta-implicit, coefficients at the half step",
        "theta": solution.theta,
        "grid_size": solution.grid_size,
        "dt": solution.dt,
        "n_dim": solution.n_dim,
        "num_output_times": int(solution.times.size),
        "t_final": float(solution.times[-1]) if solution.times.size else None,
        "motion_hash": solution.motion_hash,
    }
