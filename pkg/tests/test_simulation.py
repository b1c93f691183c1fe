"""Swing integrator: RK4 accuracy, kernel equivalence, termination logic."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from cbrank.errors import NumericalError
from cbrank.faults import FaultSpec, FaultType, build_phase_matrices
from cbrank.simulation import (
    DEFAULT_DT_S,
    POST_CLEAR_WINDOW_S,
    Trajectory,
    electrical_power,
    max_angle_separation,
    simulate_scenario,
    step_rk4,
    swing_derivatives,
)


@pytest.fixture(scope="module")
def smib_fault(smib, smib_op, smib_internals):
    """Bolted three-phase fault at the sending end of circuit 1."""
    spec = FaultSpec(
        kind="line",
        element_id="Line_0001_0002/1",
        ftype=FaultType.LLL,
        location=0.5,
    )
    return build_phase_matrices(smib, smib_op, smib_internals, spec)


# ---------------------------------------------------------------------------
# RK4 stepper on a known ODE


def test_rk4_matches_harmonic_oscillator():
    """delta'' = -k delta maps onto the stepper's (delta, omega) layout.

    With rhs (omega, -k delta) the exact solution is a cosine; classic RK4
    at this step size should track it to ~1e-9 over a full period.
    """
    k = 4.0

    def rhs(delta, omega):
        return omega.copy(), -k * delta

    delta = np.array([1.0])
    omega = np.array([0.0])
    dt = 1e-3
    period = 2.0 * math.pi / math.sqrt(k)
    n = int(round(period / dt))
    for _ in range(n):
        delta, omega = step_rk4(delta, omega, dt, rhs)
    t_end = n * dt
    assert delta[0] == pytest.approx(math.cos(math.sqrt(k) * t_end), abs=1e-9)
    assert omega[0] == pytest.approx(
        -math.sqrt(k) * math.sin(math.sqrt(k) * t_end), abs=1e-9
    )


def test_rk4_raises_on_nonfinite():
    def rhs(delta, omega):
        return omega.copy(), np.full_like(delta, np.inf)

    with pytest.raises(NumericalError, match="non-finite"):
        step_rk4(np.array([0.0]), np.array([0.0]), 1e-3, rhs, t=0.25)


# ---------------------------------------------------------------------------
# electrical power reference form


def test_electrical_power_two_machine_closed_form():
    """For two machines the coupled power expression collapses to the
    textbook P = E1 E2 (G cos d12 + B sin d12) + E1^2 G11 form."""
    y = np.array(
        [
            [complex(0.3, -2.0), complex(-0.2, 1.5)],
            [complex(-0.2, 1.5), complex(0.4, -1.8)],
        ]
    )
    e = np.array([1.05, 0.98])
    delta = np.array([0.4, -0.1])
    d12 = delta[0] - delta[1]
    p1 = e[0] ** 2 * y[0, 0].real + e[0] * e[1] * (
        y[0, 1].real * math.cos(d12) + y[0, 1].imag * math.sin(d12)
    )
    p2 = e[1] ** 2 * y[1, 1].real + e[0] * e[1] * (
        y[1, 0].real * math.cos(-d12) + y[1, 0].imag * math.sin(-d12)
    )
    pe = electrical_power(delta, e, y)
    assert pe[0] == pytest.approx(p1, abs=1e-14)
    assert pe[1] == pytest.approx(p2, abs=1e-14)


# ---------------------------------------------------------------------------
# compiled kernel vs reference implementation


def test_kernel_matches_reference_path(smib, smib_internals, smib_fault):
    """Full fault-on/post-fault run re-integrated with the plain numpy
    stepper must land on the same trajectory as the compiled kernel."""
    omega_s = smib.omega_s
    fct = 0.15
    traj = simulate_scenario(smib_fault, smib_internals, omega_s, fct, record=True)

    e = np.array([m.e_mag_pu for m in smib_internals])
    delta = np.array([m.delta0_rad for m in smib_internals])
    omega = np.zeros_like(delta)
    pm = np.array([m.pm_pu for m in smib_internals])
    h = np.array([m.h_s for m in smib_internals])
    d = np.array([m.d_pu for m in smib_internals])
    dt = DEFAULT_DT_S
    n_total = int(round((fct + POST_CLEAR_WINDOW_S) / dt))
    n_fault = math.ceil(fct / dt - 1e-9)

    def rhs_for(y_red):
        def rhs(dl, om):
            return swing_derivatives(dl, om, e, y_red, pm, h, d, omega_s)

        return rhs

    rhs_fault = rhs_for(smib_fault.y_fault)
    rhs_post = rhs_for(smib_fault.y_post)
    ref = [delta.copy()]
    for k in range(n_total):
        rhs = rhs_fault if k < n_fault else rhs_post
        delta, omega = step_rk4(delta, omega, dt, rhs)
        ref.append(delta.copy())
    ref = np.array(ref)

    assert traj.delta_rad.shape == ref.shape
    assert np.allclose(traj.delta_rad, ref, atol=1e-12)


# ---------------------------------------------------------------------------
# scenario mechanics


def test_stable_scenario_runs_full_horizon(smib, smib_internals, smib_fault):
    fct = 0.15
    traj = simulate_scenario(smib_fault, smib_internals, smib.omega_s, fct)
    n_total = int(round((fct + POST_CLEAR_WINDOW_S) / DEFAULT_DT_S))
    assert not traj.unstable
    assert not traj.terminated_early
    assert not traj.numerical_blowup
    assert traj.times_s.shape == (n_total + 1,)
    assert traj.delta_rad.shape == (n_total + 1, 2)
    assert traj.omega_dev_pu.shape == (n_total + 1, 2)
    assert traj.times_s[0] == 0.0
    assert traj.times_s[-1] == pytest.approx(n_total * DEFAULT_DT_S)
    assert traj.delta_max_deg < 180.0
    assert traj.machine_buses == (1, 2)


def test_unstable_scenario_exits_early(smib, smib_internals, smib_fault):
    """Holding the fault far past the critical time loses synchronism and
    the run stops at the 360 degree separation limit."""
    traj = simulate_scenario(smib_fault, smib_internals, smib.omega_s, 0.8)
    assert traj.unstable
    assert traj.terminated_early
    assert not traj.numerical_blowup
    assert traj.delta_max_deg > 360.0
    n_total = int(round((0.8 + POST_CLEAR_WINDOW_S) / DEFAULT_DT_S))
    assert traj.times_s.shape[0] < n_total + 1


def test_record_false_keeps_verdict_only(smib, smib_internals, smib_fault):
    full = simulate_scenario(smib_fault, smib_internals, smib.omega_s, 0.15)
    lean = simulate_scenario(
        smib_fault, smib_internals, smib.omega_s, 0.15, record=False
    )
    assert lean.times_s is None
    assert lean.delta_rad is None
    assert lean.omega_dev_pu is None
    assert lean.delta_max_deg == full.delta_max_deg
    assert lean.unstable == full.unstable


def test_max_angle_separation_consistency(smib, smib_internals, smib_fault):
    traj = simulate_scenario(smib_fault, smib_internals, smib.omega_s, 0.15)
    assert max_angle_separation(traj) == pytest.approx(traj.delta_max_deg, abs=1e-9)
    lean = simulate_scenario(
        smib_fault, smib_internals, smib.omega_s, 0.15, record=False
    )
    assert max_angle_separation(lean) == lean.delta_max_deg


def test_blowup_flagged_as_unstable(smib, smib_internals, smib_fault):
    """Non-finite state must be caught and reported as a numerical blowup
    counted on the unstable side, never a silent verdict."""
    poisoned = replace(
        smib_fault, y_fault=np.full_like(smib_fault.y_fault, complex("nan"))
    )
    traj = simulate_scenario(poisoned, smib_internals, smib.omega_s, 2.0)
    assert traj.numerical_blowup
    assert traj.unstable
    assert traj.delta_max_deg > 360.0
    # the poisoned rows are dropped; what remains is finite
    assert np.all(np.isfinite(traj.delta_rad))


def test_scenario_argument_validation(smib, smib_internals, smib_fault):
    with pytest.raises(ValueError, match="clearing time"):
        simulate_scenario(smib_fault, smib_internals, smib.omega_s, 0.0)
    with pytest.raises(ValueError, match="dt"):
        simulate_scenario(smib_fault, smib_internals, smib.omega_s, 0.5, dt_s=-1.0)


def test_fault_boundary_step_count(smib, smib_internals, smib_fault):
    """fct exactly divisible by dt keeps the clearing step aligned: the
    state at t = fct must not depend on floating point ceil jitter."""
    t1 = simulate_scenario(smib_fault, smib_internals, smib.omega_s, 0.1)
    t2 = simulate_scenario(smib_fault, smib_internals, smib.omega_s, 0.1 + 1e-12)
    idx = int(round(0.1 / DEFAULT_DT_S))
    assert np.allclose(t1.delta_rad[idx], t2.delta_rad[idx], atol=1e-12)


def test_equilibrium_is_stationary(smib, smib_internals, smib_fault):
    """With the pre-fault network on both segments nothing should move."""
    frozen = replace(smib_fault, y_fault=smib_fault.y_pre, y_post=smib_fault.y_pre)
    traj = simulate_scenario(frozen, smib_internals, smib.omega_s, 0.5)
    drift = np.abs(traj.delta_rad - traj.delta_rad[0]).max()
    assert math.degrees(drift) < 1e-6
