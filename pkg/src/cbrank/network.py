"""Static network model: CDF parsing, dynamics sidecar, breakers, Ybus.

The entry point for callers is :func:`load_system`, which reads an IEEE
common-data-format (CDF) file plus an optional dynamics sidecar JSON and
returns a validated :class:`PowerSystem`.  Admittance matrices for the
positive, negative and zero sequence networks come from :func:`build_ybus`.

Branch ids are derived from endpoints: lines are named ``Line_0001_0002``,
transformers ``Trafo_0004_0007``, with a ``/k`` circuit suffix whenever more
than one branch of the same kind joins the same bus pair.  Breakers are
named ``B1``..``B2L`` in ascending branch order, from-terminal first; only
lines carry breakers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import CdfParseError, ValidationError

TRANSFORMER_CONNECTIONS = ("yg_yg", "yg_d", "d_yg", "d_d")


@dataclass(frozen=True)
class BusRecord:
    """One bus card from a CDF file.

    Attributes:
        bus_id: External bus number (positive, unique within a system).
        name: Bus name field, trailing blanks stripped.
        bus_type: 0/1 load bus, 2 generator (PV), 3 slack.
        v_pu: Final voltage magnitude from the file, per unit.
        angle_deg: Final voltage angle from the file, degrees.
        p_load_mw / q_load_mvar: Forecast load at the bus.
        p_gen_mw / q_gen_mvar: Scheduled generation at the bus.
        v_desired_pu: Regulated voltage setpoint (0 when not regulated).
        g_shunt_pu / b_shunt_pu: Fixed bus shunt on system base.
    """

    bus_id: int
    name: str = ""
    area: int = 1
    zone: int = 1
    bus_type: int = 0
    v_pu: float = 1.0
    angle_deg: float = 0.0
    p_load_mw: float = 0.0
    q_load_mvar: float = 0.0
    p_gen_mw: float = 0.0
    q_gen_mvar: float = 0.0
    base_kv: float = 0.0
    v_desired_pu: float = 0.0
    q_max_mvar: float = 0.0
    q_min_mvar: float = 0.0
    g_shunt_pu: float = 0.0
    b_shunt_pu: float = 0.0
    remote_bus: int = 0

    def __post_init__(self):
        if self.bus_id <= 0:
            raise ValueError(f"bus id must be positive, got {self.bus_id}")
        if self.bus_type not in (0, 1, 2, 3):
            raise ValueError(
                f"bus {self.bus_id}: unknown bus type {self.bus_type}"
            )

    @property
    def is_slack(self) -> bool:
        return self.bus_type == 3

    @property
    def is_pv(self) -> bool:
        return self.bus_type == 2

    @property
    def v_setpoint(self) -> float:
        """Voltage setpoint for regulated buses: desired volts when given,
        otherwise the file's final voltage."""
        return self.v_desired_pu if self.v_desired_pu > 0.0 else self.v_pu


@dataclass(frozen=True)
class BranchRecord:
    """One branch card from a CDF file.

    ``branch_id`` is assigned after the whole section is read so that
    parallel circuits get distinguishing ``/k`` suffixes.  ``tap_ratio`` of
    zero means "no tap" and is normalised to 1.0 by :attr:`tap`.
    """

    branch_id: str
    from_bus: int
    to_bus: int
    area: int = 1
    zone: int = 1
    circuit: int = 1
    branch_type: int = 0
    r_pu: float = 0.0
    x_pu: float = 0.0
    b_pu: float = 0.0
    rating1_mva: int = 0
    rating2_mva: int = 0
    rating3_mva: int = 0
    control_bus: int = 0
    side: int = 0
    tap_ratio: float = 0.0
    phase_deg: float = 0.0
    min_tap: float = 0.0
    max_tap: float = 0.0
    step: float = 0.0
    min_limit: float = 0.0
    max_limit: float = 0.0

    def __post_init__(self):
        if self.x_pu == 0.0:
            raise ValueError(
                f"branch {self.from_bus}-{self.to_bus}: zero-impedance "
                "branches are not supported (x_pu must be nonzero)"
            )
        if self.from_bus == self.to_bus:
            raise ValueError(f"branch {self.branch_id}: from == to bus")
        if self.branch_type == 0 and self.tap_ratio not in (0.0, 1.0):
            raise ValueError(
                f"branch {self.from_bus}-{self.to_bus}: type 0 (line) with "
                f"tap ratio {self.tap_ratio}"
            )
        if self.phase_deg != 0.0:
            raise ValueError(
                f"branch {self.from_bus}-{self.to_bus}: phase shifters are "
                "not supported"
            )

    @property
    def is_line(self) -> bool:
        return self.branch_type == 0

    @property
    def tap(self) -> float:
        return self.tap_ratio if self.tap_ratio > 0.0 else 1.0

    @property
    def z_pu(self) -> complex:
        return complex(self.r_pu, self.x_pu)


@dataclass(frozen=True)
class Machine:
    """Classical-model machine data on the machine's own MVA base.

    Attributes:
        bus: Terminal bus id.
        h_s: Inertia constant, seconds, machine base.
        xd_prime_pu: Transient reactance, pu, machine base.
        d_pu: Damping coefficient, pu torque per pu speed, machine base.
        mva_base: Machine MVA rating used for base conversion.
        is_condenser: True for synchronous compensators (pm approx 0).
        x0_pu: Zero-sequence reactance, machine base.  ``None`` selects the
            configured default fraction of xd_prime.
        grounded: Whether the machine neutral provides a zero-sequence path.
    """

    bus: int
    h_s: float
    xd_prime_pu: float
    d_pu: float = 0.0
    mva_base: float = 100.0
    is_condenser: bool = False
    x0_pu: float | None = None
    grounded: bool = True

    def __post_init__(self):
        if self.h_s <= 0.0:
            raise ValueError(f"machine at bus {self.bus}: h must be > 0")
        if self.xd_prime_pu <= 0.0:
            raise ValueError(f"machine at bus {self.bus}: xd_prime must be > 0")
        if self.d_pu < 0.0:
            raise ValueError(f"machine at bus {self.bus}: d must be >= 0")
        if self.mva_base <= 0.0:
            raise ValueError(f"machine at bus {self.bus}: mva_base must be > 0")
        if self.x0_pu is not None and self.x0_pu <= 0.0:
            raise ValueError(f"machine at bus {self.bus}: x0 must be > 0")

    def h_system(self, system_mva: float) -> float:
        return self.h_s * self.mva_base / system_mva

    def d_system(self, system_mva: float) -> float:
        return self.d_pu * self.mva_base / system_mva

    def xd_prime_system(self, system_mva: float) -> float:
        return self.xd_prime_pu * system_mva / self.mva_base

    def x0_system(self, system_mva: float, default_factor: float) -> float:
        x0 = self.x0_pu if self.x0_pu is not None else default_factor * self.xd_prime_pu
        return x0 * system_mva / self.mva_base


@dataclass(frozen=True)
class Breaker:
    """A circuit breaker at one terminal of a line."""

    name: str
    branch_id: str
    terminal_bus: int


@dataclass(frozen=True)
class BreakerRegistry:
    """Deterministic breaker naming over a system's lines.

    Breakers are numbered B1.. in ascending branch (file) order, the
    from-terminal before the to-terminal, two per line.  Transformers carry
    no breakers.
    """

    breakers: tuple[Breaker, ...]

    def for_line(self, branch_id: str) -> tuple[Breaker, Breaker]:
        pair = tuple(b for b in self.breakers if b.branch_id == branch_id)
        if len(pair) != 2:
            raise KeyError(f"no breaker pair for branch {branch_id}")
        return pair  # type: ignore[return-value]

    def at_bus(self, bus_id: int) -> tuple[Breaker, ...]:
        return tuple(b for b in self.breakers if b.terminal_bus == bus_id)

    def buses_with_breakers(self) -> tuple[int, ...]:
        return tuple(sorted({b.terminal_bus for b in self.breakers}))


@dataclass(frozen=True)
class ZeroSequenceConfig:
    """Zero-sequence modelling defaults, overridable from the sidecar.

    Lines default to x0 = 3 x1 and r0 = 3 r1 with unchanged charging.
    Transformers default to a grounded-wye (from side) / delta (to side)
    equivalent; per-branch entries may override the connection and the
    impedance.  Machines contribute a grounding shunt of
    ``machine_x0_factor * xd_prime`` unless the sidecar gives an explicit
    x0 or marks the machine ungrounded.
    """

    line_r0_factor: float = 3.0
    line_x0_factor: float = 3.0
    line_b0_factor: float = 1.0
    machine_x0_factor: float = 0.5
    default_transformer_connection: str = "yg_d"
    transformer_overrides: dict = field(default_factory=dict)
    include_bus_shunts: bool = False

    def __post_init__(self):
        if self.default_transformer_connection not in TRANSFORMER_CONNECTIONS:
            raise ValueError(
                "unknown transformer connection "
                f"{self.default_transformer_connection!r}"
            )
        for bid, ov in self.transformer_overrides.items():
            conn = ov.get("connection")
            if conn is not None and conn not in TRANSFORMER_CONNECTIONS:
                raise ValueError(
                    f"transformer {bid}: unknown connection {conn!r}"
                )

    def connection_for(self, branch_id: str) -> str:
        ov = self.transformer_overrides.get(branch_id, {})
        return ov.get("connection", self.default_transformer_connection)

    def z0_for(self, branch: BranchRecord) -> complex:
        ov = self.transformer_overrides.get(branch.branch_id, {})
        r0 = ov.get("r0", branch.r_pu)
        x0 = ov.get("x0", branch.x_pu)
        return complex(r0, x0)


@dataclass(frozen=True)
class Dynamics:
    """Contents of a dynamics sidecar file."""

    machines: tuple[Machine, ...]
    zero_seq: ZeroSequenceConfig = ZeroSequenceConfig()
    f_hz: float = 60.0


@dataclass(frozen=True)
class PowerSystem:
    """A parsed network, optionally with dynamics and breakers attached.

    Bus order everywhere in the package (voltage vectors, multiplier
    vectors, Ybus rows) is the file order of ``buses``.
    """

    title: str
    mva_base: float
    buses: tuple[BusRecord, ...]
    branches: tuple[BranchRecord, ...]
    machines: tuple[Machine, ...] = ()
    breakers: BreakerRegistry | None = None
    zero_seq: ZeroSequenceConfig = ZeroSequenceConfig()
    f_hz: float = 60.0

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def omega_s(self) -> float:
        return 2.0 * math.pi * self.f_hz

    @property
    def bus_ids(self) -> tuple[int, ...]:
        return tuple(b.bus_id for b in self.buses)

    def bus_index(self, bus_id: int) -> int:
        try:
            return self.bus_ids.index(bus_id)
        except ValueError:
            raise KeyError(f"no bus {bus_id} in system") from None

    def bus(self, bus_id: int) -> BusRecord:
        return self.buses[self.bus_index(bus_id)]

    def lines(self) -> tuple[BranchRecord, ...]:
        return tuple(br for br in self.branches if br.is_line)

    def branch(self, branch_id: str) -> BranchRecord:
        for br in self.branches:
            if br.branch_id == branch_id:
                return br
        raise KeyError(f"no branch {branch_id} in system")

    def without_branch(self, branch_id: str) -> "PowerSystem":
        """A copy of the system with one branch removed (breaker trip)."""
        kept = tuple(br for br in self.branches if br.branch_id != branch_id)
        if len(kept) == len(self.branches):
            raise KeyError(f"no branch {branch_id} in system")
        return replace(self, branches=kept)

    def machine_at(self, bus_id: int) -> Machine:
        for m in self.machines:
            if m.bus == bus_id:
                return m
        raise KeyError(f"no machine at bus {bus_id}")

    @property
    def total_load_mw(self) -> float:
        return float(sum(b.p_load_mw for b in self.buses))

    @property
    def total_load_mvar(self) -> float:
        return float(sum(b.q_load_mvar for b in self.buses))

    def validate(self) -> None:
        """Raise :class:`ValidationError` on structural problems."""
        if len(self.buses) < 2:
            raise ValidationError(
                f"degenerate system: {len(self.buses)} bus(es), need >= 2"
            )
        ids = [b.bus_id for b in self.buses]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise ValidationError(f"duplicate bus ids: {sorted(dupes)}")
        if self.mva_base <= 0.0:
            raise ValidationError(f"system MVA base must be > 0, got {self.mva_base}")
        slacks = [b.bus_id for b in self.buses if b.is_slack]
        if len(slacks) != 1:
            raise ValidationError(
                f"need exactly one slack bus, found {len(slacks)}: {slacks}"
            )
        id_set = set(ids)
        seen_branch = set()
        for br in self.branches:
            for end in (br.from_bus, br.to_bus):
                if end not in id_set:
                    raise ValidationError(
                        f"branch {br.branch_id} references unknown bus {end}"
                    )
            key = (br.from_bus, br.to_bus, br.circuit)
            if key in seen_branch:
                raise ValidationError(
                    f"duplicate branch {br.from_bus}-{br.to_bus} "
                    f"circuit {br.circuit}"
                )
            seen_branch.add(key)
        for b in self.buses:
            if b.p_load_mw < 0.0:
                raise ValidationError(
                    f"bus {b.bus_id}: negative forecast load "
                    f"{b.p_load_mw} MW is not supported"
                )
            if (b.is_pv or b.is_slack) and b.v_setpoint <= 0.0:
                raise ValidationError(
                    f"bus {b.bus_id}: regulated bus without voltage setpoint"
                )
        seen_mach = set()
        for m in self.machines:
            if m.bus not in id_set:
                raise ValidationError(f"machine references unknown bus {m.bus}")
            if m.bus in seen_mach:
                raise ValidationError(f"more than one machine at bus {m.bus}")
            seen_mach.add(m.bus)
        self._check_connected()

    def _check_connected(self) -> None:
        if not self.branches:
            raise ValidationError("system has no branches; graph is disconnected")
        adj: dict[int, set[int]] = {b.bus_id: set() for b in self.buses}
        for br in self.branches:
            adj[br.from_bus].add(br.to_bus)
            adj[br.to_bus].add(br.from_bus)
        start = self.buses[0].bus_id
        seen = {start}
        stack = [start]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        missing = [b.bus_id for b in self.buses if b.bus_id not in seen]
        if missing:
            raise ValidationError(
                f"network graph is disconnected; unreachable buses: {missing}"
            )


# ---------------------------------------------------------------------- #
# CDF parsing / serialization
# ---------------------------------------------------------------------- #

# (start, end) 1-based inclusive column ranges of the common data format.
_BUS_COLS = {
    "bus_id": (1, 4),
    "name": (6, 17),
    "area": (19, 20),
    "zone": (21, 23),
    "bus_type": (25, 26),
    "v_pu": (28, 33),
    "angle_deg": (34, 40),
    "p_load_mw": (41, 49),
    "q_load_mvar": (50, 59),
    "p_gen_mw": (60, 67),
    "q_gen_mvar": (68, 75),
    "base_kv": (77, 83),
    "v_desired_pu": (85, 90),
    "q_max_mvar": (91, 98),
    "q_min_mvar": (99, 106),
    "g_shunt_pu": (107, 114),
    "b_shunt_pu": (115, 122),
    "remote_bus": (124, 127),
}

_BRANCH_COLS = {
    "from_bus": (1, 4),
    "to_bus": (6, 9),
    "area": (11, 12),
    "zone": (13, 14),
    "circuit": (17, 17),
    "branch_type": (19, 19),
    "r_pu": (20, 29),
    "x_pu": (30, 40),
    "b_pu": (41, 50),
    "rating1_mva": (51, 55),
    "rating2_mva": (57, 61),
    "rating3_mva": (63, 67),
    "control_bus": (69, 72),
    "side": (74, 74),
    "tap_ratio": (77, 82),
    "phase_deg": (84, 90),
    "min_tap": (91, 97),
    "max_tap": (98, 104),
    "step": (106, 111),
    "min_limit": (113, 119),
    "max_limit": (120, 126),
}

_INT_FIELDS = {
    "bus_id", "area", "zone", "bus_type", "remote_bus",
    "from_bus", "to_bus", "circuit", "branch_type",
    "rating1_mva", "rating2_mva", "rating3_mva", "control_bus", "side",
}


def _slice(line: str, span: tuple[int, int]) -> str:
    start, end = span
    return line[start - 1:end].strip()


def _parse_fields(line: str, line_no: int, cols: dict) -> dict:
    out = {}
    for name, span in cols.items():
        raw = _slice(line, span)
        if name == "name":
            out[name] = line[span[0] - 1:span[1]].rstrip()
            continue
        try:
            if name in _INT_FIELDS:
                out[name] = int(raw) if raw else 0
            else:
                out[name] = float(raw) if raw else 0.0
        except ValueError:
            raise CdfParseError(
                f"malformed {name} field: {raw!r}", line_no
            ) from None
    return out


def _assign_branch_ids(parsed: list[dict], line_nos: list[int]) -> list[BranchRecord]:
    """Build records, naming parallel circuits with a /k suffix."""
    pair_count: dict[tuple, int] = {}
    for p in parsed:
        kind = "Line" if p["branch_type"] == 0 else "Trafo"
        key = (kind, frozenset((p["from_bus"], p["to_bus"])))
        pair_count[key] = pair_count.get(key, 0) + 1
    records = []
    for p, line_no in zip(parsed, line_nos):
        kind = "Line" if p["branch_type"] == 0 else "Trafo"
        key = (kind, frozenset((p["from_bus"], p["to_bus"])))
        bid = f"{kind}_{p['from_bus']:04d}_{p['to_bus']:04d}"
        if pair_count[key] > 1:
            bid += f"/{p['circuit']}"
        try:
            records.append(BranchRecord(branch_id=bid, **p))
        except ValueError as exc:
            raise CdfParseError(str(exc), line_no) from None
    return records


def parse_cdf(source: str | Path) -> PowerSystem:
    """Parse a CDF file (path or text) into a validated PowerSystem.

    The result carries no machines or breakers; attach those with
    :func:`attach_dynamics` and :func:`build_breaker_registry`, or use
    :func:`load_system` for the full pipeline.
    """
    # a one-line string cannot be a valid case, so it must be a path
    if isinstance(source, Path) or "\n" not in source:
        text = Path(source).read_text()
    else:
        text = source
    lines = text.splitlines()
    if not lines or not any(ln.strip() for ln in lines):
        raise CdfParseError("empty file: no title card")

    title = lines[0].rstrip("\n")
    mva_raw = _slice(title, (32, 37))
    try:
        mva_base = float(mva_raw) if mva_raw else 100.0
    except ValueError:
        raise CdfParseError(f"malformed MVA base field: {mva_raw!r}", 1) from None

    buses: list[BusRecord] = []
    branch_dicts: list[dict] = []
    branch_line_nos: list[int] = []
    seen_bus_ids: set[int] = set()
    section = None
    saw_bus_section = False
    saw_branch_section = False
    for idx, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped:
            continue
        upper = stripped.upper()
        if upper.startswith("BUS DATA FOLLOWS"):
            section = "bus"
            saw_bus_section = True
            continue
        if upper.startswith("BRANCH DATA FOLLOWS"):
            section = "branch"
            saw_branch_section = True
            continue
        if upper.startswith(("LOSS ZONES", "INTERCHANGE DATA", "TIE LINES")):
            section = "other"
            continue
        if upper.startswith("END OF DATA"):
            break
        if stripped.split()[0] in ("-999", "-99", "-9"):
            section = None
            continue
        if section == "bus":
            fields = _parse_fields(raw, idx, _BUS_COLS)
            if fields["bus_id"] in seen_bus_ids:
                raise CdfParseError(
                    f"duplicate bus id {fields['bus_id']}", idx
                )
            seen_bus_ids.add(fields["bus_id"])
            try:
                buses.append(BusRecord(**fields))
            except ValueError as exc:
                raise CdfParseError(str(exc), idx) from None
        elif section == "branch":
            fields = _parse_fields(raw, idx, _BRANCH_COLS)
            branch_dicts.append(fields)
            branch_line_nos.append(idx)
        # other sections are read past without interpretation

    if not saw_bus_section or not buses:
        raise CdfParseError("missing or empty BUS DATA section")
    if not saw_branch_section:
        raise CdfParseError("missing BRANCH DATA section")

    branches = _assign_branch_ids(branch_dicts, branch_line_nos)
    system = PowerSystem(
        title=title,
        mva_base=mva_base,
        buses=tuple(buses),
        branches=tuple(branches),
    )
    system.validate()
    return system


def _fmt_float(value: float, width: int) -> str:
    """Right-justified float that reparses to the same value."""
    for spec in ("g", ".10g", ".17g"):
        s = format(value, spec)
        if len(s) <= width and float(s) == value:
            return s.rjust(width)
    raise ValueError(f"cannot format {value!r} in {width} columns")


def _emit(line: list[str], span: tuple[int, int], text: str) -> None:
    start, end = span
    width = end - start + 1
    if len(text) > width:
        raise ValueError(f"field {text!r} too wide for columns {span}")
    while len(line) < end:
        line.append(" ")
    padded = text.rjust(width)
    for i, ch in enumerate(padded):
        line[start - 1 + i] = ch


def _render(record, cols: dict) -> str:
    line: list[str] = []
    for name, span in cols.items():
        value = getattr(record, name)
        if name == "name":
            width = span[1] - span[0] + 1
            text = value.ljust(width)
            _emit(line, span, text[:width])
        elif name in _INT_FIELDS:
            _emit(line, span, str(value))
        else:
            _emit(line, span, _fmt_float(value, span[1] - span[0] + 1).strip())
    return "".join(line).rstrip()


def serialize_cdf(system: PowerSystem) -> str:
    """Render a PowerSystem back to CDF text (round-trips with parse_cdf)."""
    out = [system.title]
    out.append(f"BUS DATA FOLLOWS{'':28}{len(system.buses)} ITEMS")
    for bus in system.buses:
        out.append(_render(bus, _BUS_COLS))
    out.append("-999")
    out.append(f"BRANCH DATA FOLLOWS{'':25}{len(system.branches)} ITEMS")
    for br in system.branches:
        out.append(_render(br, _BRANCH_COLS))
    out.append("-999")
    out.append("END OF DATA")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------- #
# Dynamics sidecar
# ---------------------------------------------------------------------- #

def load_dynamics(source: str | Path) -> Dynamics:
    """Read a dynamics sidecar JSON file.

    Schema: ``{"f_hz": 60.0, "machines": [{"bus", "h", "xd_prime", "d",
    "mva_base", "is_condenser", ("x0"), ("grounded")}], "zero_sequence":
    {...}}``.  Machine parameters are on the machine MVA base.
    """
    path = Path(source)
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read dynamics file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"dynamics file {path} is not valid JSON: {exc}") from exc
    if "machines" not in payload or not payload["machines"]:
        raise ValidationError(f"dynamics file {path} lists no machines")

    machines = []
    for i, m in enumerate(payload["machines"]):
        try:
            machines.append(
                Machine(
                    bus=int(m["bus"]),
                    h_s=float(m["h"]),
                    xd_prime_pu=float(m["xd_prime"]),
                    d_pu=float(m.get("d", 0.0)),
                    mva_base=float(m.get("mva_base", 100.0)),
                    is_condenser=bool(m.get("is_condenser", False)),
                    x0_pu=float(m["x0"]) if "x0" in m else None,
                    grounded=bool(m.get("grounded", True)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"machine entry {i}: {exc}") from None

    zs_raw = payload.get("zero_sequence", {})
    try:
        zero_seq = ZeroSequenceConfig(
            line_r0_factor=float(zs_raw.get("line_r0_factor", 3.0)),
            line_x0_factor=float(zs_raw.get("line_x0_factor", 3.0)),
            line_b0_factor=float(zs_raw.get("line_b0_factor", 1.0)),
            machine_x0_factor=float(zs_raw.get("machine_x0_factor", 0.5)),
            default_transformer_connection=zs_raw.get(
                "default_transformer_connection", "yg_d"
            ),
            transformer_overrides=dict(zs_raw.get("transformers", {})),
            include_bus_shunts=bool(zs_raw.get("include_bus_shunts", False)),
        )
    except ValueError as exc:
        raise ValidationError(f"zero_sequence section: {exc}") from None

    return Dynamics(
        machines=tuple(machines),
        zero_seq=zero_seq,
        f_hz=float(payload.get("f_hz", 60.0)),
    )


def attach_dynamics(system: PowerSystem, dynamics: Dynamics) -> PowerSystem:
    """Return a system with machines and zero-sequence config attached."""
    out = replace(
        system,
        machines=dynamics.machines,
        zero_seq=dynamics.zero_seq,
        f_hz=dynamics.f_hz,
    )
    out.validate()
    return out


def build_breaker_registry(system: PowerSystem) -> BreakerRegistry:
    """Name two breakers per line, B1.. in ascending branch order."""
    breakers = []
    counter = 1
    for br in system.branches:
        if not br.is_line:
            continue
        breakers.append(Breaker(f"B{counter}", br.branch_id, br.from_bus))
        breakers.append(Breaker(f"B{counter + 1}", br.branch_id, br.to_bus))
        counter += 2
    return BreakerRegistry(breakers=tuple(breakers))


def load_system(cdf_path: str | Path, dyn_path: str | Path | None = None) -> PowerSystem:
    """Parse a CDF file, attach dynamics if given, and build breakers."""
    system = parse_cdf(Path(cdf_path))
    if dyn_path is not None:
        system = attach_dynamics(system, load_dynamics(dyn_path))
    registry = build_breaker_registry(system)
    return replace(system, breakers=registry)


# ---------------------------------------------------------------------- #
# Admittance assembly
# ---------------------------------------------------------------------- #

def build_ybus(system: PowerSystem, sequence: str = "positive") -> np.ndarray:
    """Nodal admittance matrix of the passive network for one sequence.

    Rows/columns follow system bus order.  Loads and machines are not
    included here; the power flow adds loads as injections and the fault
    layer adds machine branches per sequence.  The negative sequence equals
    the positive sequence for static branches.  The zero sequence applies
    the configured line factors and transformer connection equivalents
    (a delta winding blocks through flow, a grounded wye contributes a
    shunt path at its terminal).
    """
    if sequence not in ("positive", "negative", "zero"):
        raise ValueError(f"unknown sequence {sequence!r}")
    n = system.n_bus
    index = {b.bus_id: i for i, b in enumerate(system.buses)}
    y = np.zeros((n, n), dtype=complex)
    zs = system.zero_seq

    for br in system.branches:
        f, t = index[br.from_bus], index[br.to_bus]
        if sequence in ("positive", "negative"):
            ys = 1.0 / br.z_pu
            bch = br.b_pu
            tap = br.tap
            y[f, f] += (ys + 0.5j * bch) / tap**2
            y[t, t] += ys + 0.5j * bch
            y[f, t] -= ys / tap
            y[t, f] -= ys / tap
        else:
            if br.is_line:
                z0 = complex(br.r_pu * zs.line_r0_factor, br.x_pu * zs.line_x0_factor)
                ys = 1.0 / z0
                bch = br.b_pu * zs.line_b0_factor
                y[f, f] += ys + 0.5j * bch
                y[t, t] += ys + 0.5j * bch
                y[f, t] -= ys
                y[t, f] -= ys
            else:
                conn = zs.connection_for(br.branch_id)
                ys = 1.0 / zs.z0_for(br)
                tap = br.tap
                if conn == "yg_yg":
                    y[f, f] += ys / tap**2
                    y[t, t] += ys
                    y[f, t] -= ys / tap
                    y[t, f] -= ys / tap
                elif conn == "yg_d":
                    y[f, f] += ys
                elif conn == "d_yg":
                    y[t, t] += ys
                # d_d: no zero-sequence path at all

    if sequence in ("positive", "negative") or zs.include_bus_shunts:
        for bus in system.buses:
            i = index[bus.bus_id]
            y[i, i] += complex(bus.g_shunt_pu, bus.b_shunt_pu)
    return y
