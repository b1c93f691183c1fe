"""Newton-Raphson power flow and machine internal-voltage initialisation.

The solver always flat-starts (PQ magnitudes 1.0 pu, all angles equal to
the slack angle) so that repeated solves with the same inputs are bitwise
reproducible.  Load multipliers scale both P and Q of each bus load; the
slack machine absorbs the resulting deviation from the base dispatch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PowerFlowError, ValidationError
from .network import PowerSystem, build_ybus


@dataclass(frozen=True)
class OperatingPoint:
    """A converged (or failed) power flow solution in system bus order.

    Attributes:
        v: Complex bus voltages, pu.
        s_load_pu: Complex load actually applied (after multipliers), pu.
        s_gen_pu: Complex generation per bus, pu; slack P/Q and PV Q are
            taken from the solution.
        converged: Whether the mismatch tolerance was met.
        iterations: Newton iterations performed.
        max_mismatch_pu: Largest absolute P or Q mismatch at exit.
        mismatch_trace: Largest mismatch after each iteration.
    """

    v: np.ndarray
    s_load_pu: np.ndarray
    s_gen_pu: np.ndarray
    converged: bool
    iterations: int
    max_mismatch_pu: float
    mismatch_trace: tuple[float, ...]


@dataclass(frozen=True)
class MachineInternal:
    """Classical-model internal voltage and mechanical power, system base.

    ``e_mag_pu`` and ``delta0_rad`` describe the constant EMF behind
    transient reactance at the operating point; ``pm_pu`` is the mechanical
    input held constant during simulation.  All values are on the system
    MVA base.
    """

    bus: int
    e_mag_pu: float
    delta0_rad: float
    pm_pu: float
    h_s: float
    d_pu: float
    xd_prime_pu: float
    is_condenser: bool


def solve_power_flow(
    system: PowerSystem,
    load_multipliers: np.ndarray | None = None,
    *,
    tol: float = 1e-8,
    max_iter: int = 50,
) -> OperatingPoint:
    """Solve the network power flow from a flat start.

    ``load_multipliers`` is a per-bus array in system bus order (1.0
    everywhere when omitted); each entry scales that bus's P and Q load.
    Raises :class:`PowerFlowError` with the mismatch trace when the solve
    does not reach ``tol`` within ``max_iter`` iterations.
    """
    n = system.n_bus
    if load_multipliers is None:
        mult = np.ones(n)
    else:
        mult = np.asarray(load_multipliers, dtype=float)
        if mult.shape != (n,):
            raise ValueError(
                f"load_multipliers must have shape ({n},), got {mult.shape}"
            )
        if not np.all(np.isfinite(mult)) or np.any(mult < 0.0):
            raise ValueError("load_multipliers must be finite and >= 0")

    base = system.mva_base
    y = build_ybus(system, "positive")
    types = np.array([b.bus_type for b in system.buses])
    slack = int(np.flatnonzero(types == 3)[0])
    pv = np.flatnonzero(types == 2)
    pq = np.flatnonzero((types == 0) | (types == 1))
    pvpq = np.concatenate([pv, pq])

    p_load = np.array([b.p_load_mw for b in system.buses]) * mult / base
    q_load = np.array([b.q_load_mvar for b in system.buses]) * mult / base
    p_gen = np.array([b.p_gen_mw for b in system.buses]) / base
    q_gen = np.array([b.q_gen_mvar for b in system.buses]) / base
    s_spec = (p_gen - p_load) + 1j * (q_gen - q_load)

    vm = np.ones(n)
    v_set = np.array([b.v_setpoint for b in system.buses])
    vm[pv] = v_set[pv]
    vm[slack] = v_set[slack]
    va = np.full(n, np.deg2rad(system.buses[slack].angle_deg))
    v = vm * np.exp(1j * va)

    def mismatch(v):
        ds = v * np.conj(y @ v) - s_spec
        return np.concatenate([ds.real[pvpq], ds.imag[pq]])

    trace: list[float] = []
    f = mismatch(v)
    max_mis = float(np.max(np.abs(f))) if f.size else 0.0
    iterations = 0
    while max_mis >= tol and iterations < max_iter:
        ibus = y @ v
        diag_v = np.diag(v)
        diag_i = np.diag(ibus)
        diag_vn = np.diag(v / np.abs(v))
        ds_dva = 1j * diag_v @ np.conj(diag_i - y @ diag_v)
        ds_dvm = diag_v @ np.conj(y @ diag_vn) + np.conj(diag_i) @ diag_vn
        j11 = ds_dva[np.ix_(pvpq, pvpq)].real
        j12 = ds_dvm[np.ix_(pvpq, pq)].real
        j21 = ds_dva[np.ix_(pq, pvpq)].imag
        j22 = ds_dvm[np.ix_(pq, pq)].imag
        jac = np.block([[j11, j12], [j21, j22]])
        try:
            dx = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            raise PowerFlowError(
                "singular Jacobian", tuple(trace)
            ) from None
        va[pvpq] += dx[: pvpq.size]
        vm[pq] += dx[pvpq.size:]
        v = vm * np.exp(1j * va)
        f = mismatch(v)
        max_mis = float(np.max(np.abs(f)))
        trace.append(max_mis)
        iterations += 1

    if max_mis >= tol:
        raise PowerFlowError(
            f"power flow did not converge in {max_iter} iterations "
            f"(max mismatch {max_mis:.3e} pu)",
            tuple(trace),
        )

    s_inj = v * np.conj(y @ v)
    s_load = p_load + 1j * q_load
    s_gen = np.zeros(n, dtype=complex)
    gen_buses = np.flatnonzero((p_gen != 0.0) | (q_gen != 0.0) | (types >= 2))
    for i in gen_buses:
        if i == slack:
            s_gen[i] = s_inj[i] + s_load[i]
        elif types[i] == 2:
            s_gen[i] = p_gen[i] + 1j * (s_inj[i].imag + s_load[i].imag)
        else:
            s_gen[i] = p_gen[i] + 1j * q_gen[i]

    return OperatingPoint(
        v=v,
        s_load_pu=s_load,
        s_gen_pu=s_gen,
        converged=True,
        iterations=iterations,
        max_mismatch_pu=max_mis,
        mismatch_trace=tuple(trace),
    )


def init_machine_internals(
    system: PowerSystem, op: OperatingPoint
) -> tuple[MachineInternal, ...]:
    """Compute E, delta0 and pm for every machine at an operating point.

    E = V_t + j xd' I_t with the terminal current from the machine's solved
    generation; pm = Re(V_t conj(I_t)).  Machine-base parameters are
    converted to the system MVA base here, so downstream consumers never
    see machine bases.
    """
    if not system.machines:
        raise ValidationError("system has no machines attached")
    if not op.converged:
        raise ValueError("operating point is not converged")
    out = []
    for mach in system.machines:
        b = system.bus_index(mach.bus)
        v_t = op.v[b]
        i_t = np.conj(op.s_gen_pu[b] / v_t)
        xd = mach.xd_prime_system(system.mva_base)
        e = v_t + 1j * xd * i_t
        out.append(
            MachineInternal(
                bus=mach.bus,
                e_mag_pu=float(np.abs(e)),
                delta0_rad=float(np.angle(e)),
                pm_pu=float((v_t * np.conj(i_t)).real),
                h_s=mach.h_system(system.mva_base),
                d_pu=mach.d_system(system.mva_base),
                xd_prime_pu=xd,
                is_condenser=mach.is_condenser,
            )
        )
    return tuple(out)
