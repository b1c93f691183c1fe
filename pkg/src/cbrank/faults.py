"""Fault representation: sequence Thevenin equivalents, fault shunts,
and the reduced admittance matrices driving the swing simulation.

Unbalanced faults enter the positive-sequence dynamic network as a single
shunt admittance at the fault node, derived from the negative and zero
sequence Thevenin impedances seen there:

    LLL: z_eff = zf            LL:  z_eff = z2 + zf
    LG:  z_eff = z0 + z2 + 3zf LLG: z_eff = z2 (z0 + 3zf) / (z2 + z0 + 3zf)

A bolted three-phase fault (z_eff = 0) is returned as an infinite
admittance marker meaning the node is grounded; :func:`build_phase_matrices`
removes that node before reduction.  Infinite sequence impedances (no
path, e.g. behind a delta winding) propagate to a zero fault admittance.

All reduced matrices are on machine internal nodes, loads converted to
constant admittance at the operating-point voltages.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import MachineIslandedError, NumericalError
from .network import BranchRecord, BusRecord, PowerSystem, build_ybus
from .powerflow import MachineInternal, OperatingPoint

INFINITE_ADMITTANCE = complex(math.inf, 0.0)


class FaultType(str, Enum):
    """Shunt fault kinds, in the sampling table's order."""

    LG = "LG"
    LLG = "LLG"
    LL = "LL"
    LLL = "LLL"


def bus_element_id(bus_id: int) -> str:
    return f"Bus_{bus_id:04d}"


def element_bus_id(element: str) -> int:
    if not element.startswith("Bus_"):
        raise ValueError(f"{element!r} is not a bus element id")
    return int(element[4:])


@dataclass(frozen=True)
class FaultSpec:
    """One concrete fault to apply.

    ``kind`` is "line" or "bus".  For line faults ``location`` is the
    fractional distance from the from-bus in [0, 1].  For bus faults the
    fault sits at the bus itself and ``host_line_id`` (default: the
    lowest-id incident line) is the line tripped at clearing time.
    """

    kind: str
    element_id: str
    ftype: FaultType
    location: float | None = None
    zf_pu: float = 0.0
    host_line_id: str | None = None

    def __post_init__(self):
        if self.kind not in ("line", "bus"):
            raise ValueError(f"unknown fault kind {self.kind!r}")
        if self.kind == "line":
            if self.location is None or not 0.0 <= self.location <= 1.0:
                raise ValueError(
                    f"line fault needs location in [0, 1], got {self.location}"
                )
        if self.zf_pu < 0.0:
            raise ValueError("fault impedance must be >= 0")


@dataclass(frozen=True)
class PhaseMatrices:
    """Reduced machine-node admittance matrices for the three phases of a
    scenario: pre-fault, fault-on, post-clearing."""

    y_pre: np.ndarray
    y_fault: np.ndarray
    y_post: np.ndarray
    machine_buses: tuple[int, ...]
    fault_bus: int
    tripped_branch_id: str
    fault_admittance: complex


def choose_host_line(system: PowerSystem, bus_id: int) -> str:
    """The line tripped to clear a bus fault: lowest-id incident line."""
    incident = [
        br.branch_id
        for br in system.lines()
        if bus_id in (br.from_bus, br.to_bus)
    ]
    if not incident:
        raise ValueError(f"bus {bus_id} has no incident line to trip")
    return min(incident)


def insert_fault_node(
    system: PowerSystem, line_id: str, fraction: float
) -> tuple[PowerSystem, int]:
    """Split a line at ``fraction`` from its from-bus, adding a fault node.

    Series impedance and charging split proportionally, so the two
    segments in series reproduce the original line exactly.  ``fraction``
    of 0 or 1 returns the system unchanged with the matching terminal bus
    as the fault node.
    """
    branch = system.branch(line_id)
    if not branch.is_line:
        raise ValueError(f"{line_id} is a transformer; faults target lines")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    if fraction == 0.0:
        return system, branch.from_bus
    if fraction == 1.0:
        return system, branch.to_bus

    node_id = max(system.bus_ids) + 1
    fault_bus = BusRecord(
        bus_id=node_id,
        name="FAULT",
        bus_type=0,
        base_kv=system.bus(branch.from_bus).base_kv,
    )
    seg_a = BranchRecord(
        branch_id=f"{line_id}~a",
        from_bus=branch.from_bus,
        to_bus=node_id,
        circuit=branch.circuit,
        branch_type=0,
        r_pu=branch.r_pu * fraction,
        x_pu=branch.x_pu * fraction,
        b_pu=branch.b_pu * fraction,
    )
    seg_b = BranchRecord(
        branch_id=f"{line_id}~b",
        from_bus=node_id,
        to_bus=branch.to_bus,
        circuit=branch.circuit,
        branch_type=0,
        r_pu=branch.r_pu * (1.0 - fraction),
        x_pu=branch.x_pu * (1.0 - fraction),
        b_pu=branch.b_pu * (1.0 - fraction),
    )
    branches = tuple(
        br for br in system.branches if br.branch_id != line_id
    ) + (seg_a, seg_b)
    aug = replace(system, buses=system.buses + (fault_bus,), branches=branches)
    return aug, node_id


def _sequence_matrix(system: PowerSystem, sequence: str) -> np.ndarray:
    """Sequence Ybus with machine shunts included.

    Machines appear as xd' shunts in the negative sequence and, when
    grounded, as x0 shunts in the zero sequence.  Loads are not part of
    the sequence networks used for fault-shunt computation.
    """
    y = build_ybus(system, sequence)
    for mach in system.machines:
        i = system.bus_index(mach.bus)
        if sequence == "negative":
            y[i, i] += 1.0 / complex(0.0, mach.xd_prime_system(system.mva_base))
        else:
            if mach.grounded:
                x0 = mach.x0_system(
                    system.mva_base, system.zero_seq.machine_x0_factor
                )
                y[i, i] += 1.0 / complex(0.0, x0)
    return y


def _grounded_component(y: np.ndarray, node: int, tol: float = 1e-9) -> list[int] | None:
    """Indices of ``node``'s connected component if it has a ground path.

    Connectivity follows the off-diagonal couplings of ``y``; a node is
    grounded when its row sum (the net shunt term) is non-negligible.
    Returns ``None`` when the component never touches ground, which makes
    the Thevenin impedance infinite.
    """
    n = y.shape[0]
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        parent[find(a)] = find(b)

    for i in range(n):
        for j in range(i + 1, n):
            if abs(y[i, j]) > tol:
                union(i, j)
    grounded_roots = set()
    row_sums = y.sum(axis=1)
    for i in range(n):
        if abs(row_sums[i]) > tol:
            grounded_roots.add(find(i))
    root = find(node)
    if root not in grounded_roots:
        return None
    return [i for i in range(n) if find(i) == root]


def thevenin_sequence_impedance(
    system: PowerSystem, bus_id: int, sequence: str
) -> complex | None:
    """Driving-point impedance of a sequence network at one bus.

    Returns ``None`` when the bus has no path to ground in that sequence
    (infinite impedance), instead of failing the solve.
    """
    if sequence not in ("negative", "zero"):
        raise ValueError(f"sequence must be negative or zero, got {sequence!r}")
    y = _sequence_matrix(system, sequence)
    node = system.bus_index(bus_id)
    component = _grounded_component(y, node)
    if component is None:
        return None
    sub = y[np.ix_(component, component)]
    rhs = np.zeros(len(component), dtype=complex)
    pos = component.index(node)
    rhs[pos] = 1.0
    try:
        v = np.linalg.solve(sub, rhs)
    except np.linalg.LinAlgError:
        raise NumericalError(
            f"singular {sequence}-sequence network at bus {bus_id}"
        ) from None
    return complex(v[pos])


def effective_fault_admittance(
    ftype: FaultType,
    z0: complex | None,
    z2: complex | None,
    zf: float = 0.0,
) -> complex:
    """Positive-sequence shunt admittance equivalent to a shunt fault.

    ``None`` impedances mean "no path" and yield zero admittance (the
    fault draws no current); a bolted three-phase fault yields the
    :data:`INFINITE_ADMITTANCE` marker (node grounded outright).
    """
    zf_c = complex(zf, 0.0)
    if ftype == FaultType.LLL:
        if zf == 0.0:
            return INFINITE_ADMITTANCE
        return 1.0 / zf_c
    if ftype == FaultType.LL:
        if z2 is None:
            return 0.0j
        return 1.0 / (z2 + zf_c)
    if ftype == FaultType.LG:
        if z0 is None or z2 is None:
            return 0.0j
        return 1.0 / (z0 + z2 + 3.0 * zf_c)
    if ftype == FaultType.LLG:
        if z2 is None:
            return 0.0j
        if z0 is None:
            return 1.0 / z2  # no ground return: degenerates to LL
        z_eff = z2 * (z0 + 3.0 * zf_c) / (z2 + z0 + 3.0 * zf_c)
        return 1.0 / z_eff
    raise ValueError(f"unknown fault type {ftype!r}")


def kron_reduce(y: np.ndarray, keep: list[int] | np.ndarray) -> np.ndarray:
    """Eliminate all nodes not in ``keep``: Ykk - Yke Yee^-1 Yek."""
    keep = np.asarray(keep, dtype=int)
    n = y.shape[0]
    elim = np.setdiff1d(np.arange(n), keep)
    if elim.size == 0:
        return y[np.ix_(keep, keep)].copy()
    y_kk = y[np.ix_(keep, keep)]
    y_ke = y[np.ix_(keep, elim)]
    y_ek = y[np.ix_(elim, keep)]
    y_ee = y[np.ix_(elim, elim)]
    try:
        x = np.linalg.solve(y_ee, y_ek)
    except np.linalg.LinAlgError:
        raise NumericalError(
            f"singular block eliminating nodes {elim.tolist()}"
        ) from None
    reduced = y_kk - y_ke @ x
    if not np.all(np.isfinite(reduced)):
        raise NumericalError(
            f"non-finite entries eliminating nodes {elim.tolist()}"
        )
    return reduced


def _machine_augmented(
    system_like: PowerSystem,
    load_y: dict[int, complex],
    internals: tuple[MachineInternal, ...],
) -> tuple[np.ndarray, list[int]]:
    """Positive-sequence Ybus with loads as shunts and machine internal
    nodes appended.  Returns the matrix and the machine node indices."""
    n = system_like.n_bus
    m = len(internals)
    y = np.zeros((n + m, n + m), dtype=complex)
    y[:n, :n] = build_ybus(system_like, "positive")
    for bus_id, y_l in load_y.items():
        y[system_like.bus_index(bus_id), system_like.bus_index(bus_id)] += y_l
    for k, mach in enumerate(internals):
        b = system_like.bus_index(mach.bus)
        y_m = 1.0 / complex(0.0, mach.xd_prime_pu)
        y[n + k, n + k] += y_m
        y[b, b] += y_m
        y[n + k, b] -= y_m
        y[b, n + k] -= y_m
    return y, list(range(n, n + m))


def _check_machines_connected(system: PowerSystem) -> None:
    adj: dict[int, set[int]] = {b.bus_id: set() for b in system.buses}
    for br in system.branches:
        adj[br.from_bus].add(br.to_bus)
        adj[br.to_bus].add(br.from_bus)
    machine_buses = [m.bus for m in system.machines]
    start = machine_buses[0]
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    stranded = [b for b in machine_buses if b not in seen]
    if stranded:
        raise MachineIslandedError(
            f"machines at buses {stranded} islanded from the rest of the network"
        )


def build_phase_matrices(
    system: PowerSystem,
    op: OperatingPoint,
    internals: tuple[MachineInternal, ...],
    fault: FaultSpec,
) -> PhaseMatrices:
    """Reduced pre/fault/post admittance matrices for one scenario.

    Loads become constant admittances at the operating-point voltages.
    The fault-on network carries the equivalent fault shunt at the fault
    node (or drops a grounded node outright for a bolted LLL).  The
    post-clearing network is the original system without the faulted or
    host line; a topology that islands any machine raises
    :class:`MachineIslandedError` so the scenario can be rejected.
    """
    load_y = {}
    for i, bus in enumerate(system.buses):
        s = op.s_load_pu[i]
        if s != 0:
            load_y[bus.bus_id] = np.conj(s) / abs(op.v[i]) ** 2

    if fault.kind == "line":
        aug, fault_bus = insert_fault_node(system, fault.element_id, fault.location)
        tripped = fault.element_id
    else:
        bus_id = element_bus_id(fault.element_id)
        system.bus(bus_id)  # raises KeyError on unknown bus
        aug, fault_bus = system, bus_id
        tripped = fault.host_line_id or choose_host_line(system, bus_id)

    # pre-fault network from the unmodified system: splitting a line's pi
    # model at the fault node redistributes its charging and would shift
    # the equilibrium, so the split applies to the fault-on matrix only
    y_pre_full, keep_pre = _machine_augmented(system, load_y, internals)
    y_pre = kron_reduce(y_pre_full, keep_pre)

    y_full, keep = _machine_augmented(aug, load_y, internals)

    if fault.ftype == FaultType.LLL and fault.zf_pu == 0.0:
        y_eff = INFINITE_ADMITTANCE
    else:
        z2 = thevenin_sequence_impedance(aug, fault_bus, "negative")
        if fault.ftype in (FaultType.LG, FaultType.LLG):
            z0 = thevenin_sequence_impedance(aug, fault_bus, "zero")
        else:
            z0 = None
        y_eff = effective_fault_admittance(fault.ftype, z0, z2, fault.zf_pu)

    node = aug.bus_index(fault_bus)
    if cmath.isinf(y_eff):
        mask = np.ones(y_full.shape[0], dtype=bool)
        mask[node] = False
        y_grounded = y_full[np.ix_(np.flatnonzero(mask), np.flatnonzero(mask))]
        keep_g = [k - 1 if k > node else k for k in keep]
        y_fault = kron_reduce(y_grounded, keep_g)
    else:
        y_faulted_full = y_full.copy()
        y_faulted_full[node, node] += y_eff
        y_fault = kron_reduce(y_faulted_full, keep)

    post_sys = system.without_branch(tripped)
    _check_machines_connected(post_sys)
    y_post_full, keep_post = _machine_augmented(post_sys, load_y, internals)
    y_post = kron_reduce(y_post_full, keep_post)

    return PhaseMatrices(
        y_pre=y_pre,
        y_fault=y_fault,
        y_post=y_post,
        machine_buses=tuple(m.bus for m in internals),
        fault_bus=fault_bus,
        tripped_branch_id=tripped,
        fault_admittance=y_eff,
    )
