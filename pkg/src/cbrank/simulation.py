"""Classical-model swing simulation with fixed-step RK4.

State per machine is (delta [rad], omega_dev [pu speed deviation]):

    d delta / dt = omega_s * omega_dev
    d omega_dev / dt = (pm - pe - D omega_dev) / (2H)

with pe from the reduced network, pe_i = sum_j Ei Ej (Gij cos dij + Bij
sin dij).  The fault-on matrix applies to steps starting before the fault
clearing time, the post-clearing matrix afterwards; the horizon is fct
plus a fixed 5 s observation window at dt = 1 ms.

Integration stops early once the largest pairwise angle separation
exceeds 360 degrees (the verdict is already decided), and a non-finite
state marks the scenario unstable with a distinct blowup flag.  The hot
loop is compiled with numba; :func:`swing_derivatives` and
:func:`step_rk4` are the plain reference forms used for testing and for
single-step callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NumericalError
from .faults import PhaseMatrices
from .powerflow import MachineInternal

POST_CLEAR_WINDOW_S = 5.0
DEFAULT_DT_S = 1e-3
SEPARATION_LIMIT_DEG = 360.0
_BLOWUP_DELTA_MAX_DEG = 361.0  # conservative placeholder, keeps unstable <=> >360
_TWO_PI = 2.0 * math.pi

_STATUS_COMPLETED = 0
_STATUS_SEPARATED = 1
_STATUS_BLOWUP = 2


@dataclass(frozen=True)
class Trajectory:
    """Simulation output; angle traces are radians, (steps+1, n_machines).

    ``delta_max_deg`` is the largest pairwise rotor-angle separation seen
    at any recorded step.  ``unstable`` holds exactly when it exceeds 360
    degrees.  ``numerical_blowup`` marks runs terminated by a non-finite
    state, which are conservatively counted unstable.
    """

    times_s: np.ndarray | None
    delta_rad: np.ndarray | None
    omega_dev_pu: np.ndarray | None
    delta_max_deg: float
    unstable: bool
    terminated_early: bool
    numerical_blowup: bool
    machine_buses: tuple[int, ...]


def electrical_power(
    delta: np.ndarray, e_mag: np.ndarray, y_red: np.ndarray
) -> np.ndarray:
    """Machine electrical power from the reduced network (reference form)."""
    d = np.asarray(delta, dtype=float)
    e = np.asarray(e_mag, dtype=float)
    dij = d[:, None] - d[None, :]
    ee = np.outer(e, e)
    terms = ee * (y_red.real * np.cos(dij) + y_red.imag * np.sin(dij))
    return terms.sum(axis=1)


def swing_derivatives(
    delta: np.ndarray,
    omega_dev: np.ndarray,
    e_mag: np.ndarray,
    y_red: np.ndarray,
    pm: np.ndarray,
    h_s: np.ndarray,
    d_pu: np.ndarray,
    omega_s: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side of the swing equations (reference form)."""
    pe = electrical_power(delta, e_mag, y_red)
    ddelta = omega_s * np.asarray(omega_dev, dtype=float)
    domega = (pm - pe - d_pu * omega_dev) / (2.0 * h_s)
    return ddelta, domega


def step_rk4(
    delta: np.ndarray,
    omega_dev: np.ndarray,
    dt: float,
    rhs,
    t: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """One classic RK4 step of ``rhs(delta, omega_dev) -> (dd, dw)``.

    Raises :class:`NumericalError` carrying the time stamp when the new
    state is not finite.
    """
    k1d, k1w = rhs(delta, omega_dev)
    k2d, k2w = rhs(delta + 0.5 * dt * k1d, omega_dev + 0.5 * dt * k1w)
    k3d, k3w = rhs(delta + 0.5 * dt * k2d, omega_dev + 0.5 * dt * k2w)
    k4d, k4w = rhs(delta + dt * k3d, omega_dev + dt * k3w)
    new_delta = delta + (dt / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
    new_omega = omega_dev + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    if not (np.all(np.isfinite(new_delta)) and np.all(np.isfinite(new_omega))):
        raise NumericalError(f"non-finite state after RK4 step at t={t:.6f} s")
    return new_delta, new_omega


@njit(cache=True)
def _rhs_kernel(delta, omega, cg, cb, pm, inv_2h, d_pu, omega_s, out_dd, out_dw):
    m = delta.shape[0]
    for i in range(m):
        si = math.sin(delta[i])
        ci = math.cos(delta[i])
        pe = cg[i, i]
        for j in range(m):
            if j != i:
                sj = math.sin(delta[j])
                cj = math.cos(delta[j])
                pe += cg[i, j] * (ci * cj + si * sj) + cb[i, j] * (si * cj - ci * sj)
        out_dd[i] = omega_s * omega[i]
        out_dw[i] = (pm[i] - pe - d_pu[i] * omega[i]) * inv_2h[i]


@njit(cache=True)
def _max_separation(delta):
    m = delta.shape[0]
    sep = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            d = abs(delta[i] - delta[j])
            if d > sep:
                sep = d
    return sep


@njit(cache=True)
def _integrate(
    delta0,
    cg_fault, cb_fault, cg_post, cb_post,
    pm, inv_2h, d_pu, omega_s,
    dt, n_fault, n_total, sep_limit_rad,
    record, delta_trace, omega_trace,
):
    m = delta0.shape[0]
    delta = delta0.copy()
    omega = np.zeros(m)
    k1d = np.empty(m); k1w = np.empty(m)
    k2d = np.empty(m); k2w = np.empty(m)
    k3d = np.empty(m); k3w = np.empty(m)
    k4d = np.empty(m); k4w = np.empty(m)
    td = np.empty(m); tw = np.empty(m)

    if record:
        for i in range(m):
            delta_trace[0, i] = delta[i]
            omega_trace[0, i] = omega[i]
    max_sep = _max_separation(delta)
    if max_sep > sep_limit_rad:
        return 0, max_sep, _STATUS_SEPARATED

    for k in range(n_total):
        if k < n_fault:
            cg, cb = cg_fault, cb_fault
        else:
            cg, cb = cg_post, cb_post

        _rhs_kernel(delta, omega, cg, cb, pm, inv_2h, d_pu, omega_s, k1d, k1w)
        for i in range(m):
            td[i] = delta[i] + 0.5 * dt * k1d[i]
            tw[i] = omega[i] + 0.5 * dt * k1w[i]
        _rhs_kernel(td, tw, cg, cb, pm, inv_2h, d_pu, omega_s, k2d, k2w)
        for i in range(m):
            td[i] = delta[i] + 0.5 * dt * k2d[i]
            tw[i] = omega[i] + 0.5 * dt * k2w[i]
        _rhs_kernel(td, tw, cg, cb, pm, inv_2h, d_pu, omega_s, k3d, k3w)
        for i in range(m):
            td[i] = delta[i] + dt * k3d[i]
            tw[i] = omega[i] + dt * k3w[i]
        _rhs_kernel(td, tw, cg, cb, pm, inv_2h, d_pu, omega_s, k4d, k4w)

        finite = True
        for i in range(m):
            delta[i] += (dt / 6.0) * (k1d[i] + 2.0 * k2d[i] + 2.0 * k3d[i] + k4d[i])
            omega[i] += (dt / 6.0) * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i])
            if not (math.isfinite(delta[i]) and math.isfinite(omega[i])):
                finite = False
        if not finite:
            return k + 1, max_sep, _STATUS_BLOWUP
        if record:
            for i in range(m):
                delta_trace[k + 1, i] = delta[i]
                omega_trace[k + 1, i] = omega[i]
        sep = _max_separation(delta)
        if sep > max_sep:
            max_sep = sep
        if max_sep > sep_limit_rad:
            return k + 1, max_sep, _STATUS_SEPARATED

    return n_total, max_sep, _STATUS_COMPLETED


def _coupling_matrices(
    e_mag: np.ndarray, y_red: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    ee = np.outer(e_mag, e_mag)
    return (
        np.ascontiguousarray(ee * y_red.real),
        np.ascontiguousarray(ee * y_red.imag),
    )


def simulate_scenario(
    matrices: PhaseMatrices,
    internals: tuple[MachineInternal, ...],
    omega_s: float,
    fct_s: float,
    *,
    dt_s: float = DEFAULT_DT_S,
    record: bool = True,
) -> Trajectory:
    """Integrate one fault scenario from the pre-fault equilibrium.

    The fault is applied at t = 0; steps starting before ``fct_s`` use the
    fault-on network, later steps the post-clearing network.  The horizon
    is ``fct_s`` plus 5 s.  With ``record=False`` only the verdict and
    delta_max are kept, which the sampling campaigns use for speed.
    """
    if fct_s <= 0.0:
        raise ValueError(f"fault clearing time must be > 0, got {fct_s}")
    if dt_s <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt_s}")

    e_mag = np.array([m.e_mag_pu for m in internals])
    delta0 = np.array([m.delta0_rad for m in internals])
    pm = np.array([m.pm_pu for m in internals])
    inv_2h = 1.0 / (2.0 * np.array([m.h_s for m in internals]))
    d_pu = np.array([m.d_pu for m in internals])

    cg_fault, cb_fault = _coupling_matrices(e_mag, matrices.y_fault)
    cg_post, cb_post = _coupling_matrices(e_mag, matrices.y_post)

    n_total = int(round((fct_s + POST_CLEAR_WINDOW_S) / dt_s))
    n_fault = int(math.ceil(fct_s / dt_s - 1e-9))
    m = len(internals)
    if record:
        delta_trace = np.empty((n_total + 1, m))
        omega_trace = np.empty((n_total + 1, m))
    else:
        delta_trace = np.empty((1, m))
        omega_trace = np.empty((1, m))

    steps, max_sep_rad, status = _integrate(
        delta0,
        cg_fault, cb_fault, cg_post, cb_post,
        pm, inv_2h, d_pu, omega_s,
        dt_s, n_fault, n_total, math.radians(SEPARATION_LIMIT_DEG),
        record, delta_trace, omega_trace,
    )

    delta_max_deg = math.degrees(max_sep_rad)
    blowup = status == _STATUS_BLOWUP
    if blowup and delta_max_deg <= SEPARATION_LIMIT_DEG:
        delta_max_deg = _BLOWUP_DELTA_MAX_DEG
    unstable = delta_max_deg > SEPARATION_LIMIT_DEG

    times = delta = omega = None
    if record:
        # a blowup step wrote no state; keep rows up to the last finite one
        recorded = steps + 1 if not blowup else steps
        times = dt_s * np.arange(recorded)
        delta = delta_trace[:recorded].copy()
        omega = omega_trace[:recorded].copy()

    return Trajectory(
        times_s=times,
        delta_rad=delta,
        omega_dev_pu=omega,
        delta_max_deg=delta_max_deg,
        unstable=unstable,
        terminated_early=status != _STATUS_COMPLETED,
        numerical_blowup=blowup,
        machine_buses=matrices.machine_buses,
    )


def max_angle_separation(trajectory: Trajectory) -> float:
    """Largest pairwise |delta_i - delta_j| over all recorded steps, degrees."""
    if trajectory.delta_rad is None:
        return trajectory.delta_max_deg
    d = trajectory.delta_rad
    sep = np.abs(d[:, :, None] - d[:, None, :]).max() if d.size else 0.0
    return float(np.degrees(sep))
