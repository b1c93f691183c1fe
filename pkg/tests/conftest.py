"""Shared fixtures: the packaged 14-bus study case, a single-machine
infinite-bus benchmark, and a two-bus case with a closed-form solution."""

from __future__ import annotations

from dataclasses import replace

import pytest

from cbrank.data import case14_cdf_path, case14_dynamics_path
from cbrank.network import (
    BranchRecord,
    BusRecord,
    Machine,
    PowerSystem,
    build_breaker_registry,
    load_system,
)
from cbrank.powerflow import init_machine_internals, solve_power_flow

# infinite bus stand-in: enough inertia that its angle is frozen over any
# study window, and a reactance small enough to pin the terminal voltage
INF_H = 1.0e6
INF_XD = 1.0e-6

SMIB_H = 3.5
SMIB_XD = 0.3
SMIB_LINE_X = 0.2
SMIB_PGEN_MW = 100.0


@pytest.fixture
def announce(capsys):
    """Print a result line past pytest's capture, next to the test name."""

    def _announce(line: str) -> None:
        with capsys.disabled():
            print(line)

    return _announce


@pytest.fixture(scope="session")
def system14() -> PowerSystem:
    return load_system(case14_cdf_path(), case14_dynamics_path())


@pytest.fixture(scope="session")
def op14(system14):
    return solve_power_flow(system14)


@pytest.fixture(scope="session")
def internals14(system14, op14):
    return init_machine_internals(system14, op14)


def build_smib() -> PowerSystem:
    """Machine behind xd' = 0.3 feeding an infinite bus over two parallel
    x = 0.2 lines; lossless, undamped, all quantities on system base."""
    buses = (
        BusRecord(bus_id=1, name="INF", bus_type=3, v_pu=1.0, v_desired_pu=1.0),
        BusRecord(
            bus_id=2,
            name="GEN",
            bus_type=2,
            v_pu=1.0,
            v_desired_pu=1.0,
            p_gen_mw=SMIB_PGEN_MW,
        ),
    )
    branches = (
        BranchRecord(
            branch_id="Line_0001_0002/1", from_bus=1, to_bus=2, circuit=1,
            x_pu=SMIB_LINE_X,
        ),
        BranchRecord(
            branch_id="Line_0001_0002/2", from_bus=1, to_bus=2, circuit=2,
            x_pu=SMIB_LINE_X,
        ),
    )
    machines = (
        Machine(bus=1, h_s=INF_H, xd_prime_pu=INF_XD, d_pu=0.0),
        Machine(bus=2, h_s=SMIB_H, xd_prime_pu=SMIB_XD, d_pu=0.0),
    )
    system = PowerSystem(
        title="SMIB benchmark",
        mva_base=100.0,
        buses=buses,
        branches=branches,
        machines=machines,
    )
    system = replace(system, breakers=build_breaker_registry(system))
    system.validate()
    return system


@pytest.fixture(scope="session")
def smib() -> PowerSystem:
    return build_smib()


@pytest.fixture(scope="session")
def smib_op(smib):
    return solve_power_flow(smib)


@pytest.fixture(scope="session")
def smib_internals(smib, smib_op):
    return init_machine_internals(smib, smib_op)


TWO_BUS_X = 0.1
TWO_BUS_LOAD_MW = 50.0


def build_two_bus() -> PowerSystem:
    """Slack at 1.0 pu feeding a P = 0.5 pu, Q = 0 load over x = 0.1."""
    buses = (
        BusRecord(bus_id=1, name="SRC", bus_type=3, v_pu=1.0, v_desired_pu=1.0),
        BusRecord(bus_id=2, name="LOAD", bus_type=0, p_load_mw=TWO_BUS_LOAD_MW),
    )
    branches = (
        BranchRecord(branch_id="Line_0001_0002", from_bus=1, to_bus=2, x_pu=TWO_BUS_X),
    )
    return PowerSystem(
        title="two bus", mva_base=100.0, buses=buses, branches=branches
    )


@pytest.fixture(scope="session")
def two_bus() -> PowerSystem:
    return build_two_bus()
