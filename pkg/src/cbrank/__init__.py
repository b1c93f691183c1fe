"""Risk-based circuit-breaker priority ranking via probabilistic
transient stability analysis.

The pipeline: parse an IEEE common-format case and a machine dynamics
sidecar, solve the base power flow, convert sampled fault scenarios into
reduced admittance matrices (sequence-component shunts for unbalanced
types), integrate the classical-model swing equations, score each run
with a severity built on the transient stability index, and aggregate
Monte-Carlo campaigns into ranked breaker priority tables.
"""

from ._version import __version__
from .errors import (
    CdfParseError,
    MachineIslandedError,
    NumericalError,
    PowerFlowError,
    ValidationError,
)
from .faults import (
    INFINITE_ADMITTANCE,
    FaultSpec,
    FaultType,
    PhaseMatrices,
    build_phase_matrices,
    bus_element_id,
    effective_fault_admittance,
    element_bus_id,
    insert_fault_node,
    kron_reduce,
    thevenin_sequence_impedance,
)
from .network import (
    Breaker,
    BreakerRegistry,
    BranchRecord,
    BusRecord,
    Machine,
    PowerSystem,
    ZeroSequenceConfig,
    attach_dynamics,
    build_breaker_registry,
    build_ybus,
    load_dynamics,
    load_system,
    parse_cdf,
    serialize_cdf,
)
from .powerflow import (
    MachineInternal,
    OperatingPoint,
    init_machine_internals,
    solve_power_flow,
)
from .reporting import (
    RunManifest,
    build_manifest,
    emit_report,
    emit_trajectory,
    format_percent,
    parse_report_csv,
    render_report_csv,
    render_report_json,
    render_top5,
)
from .risk import (
    ExcludedElement,
    RankingEntry,
    RankingReport,
    RiskSample,
    SimOutcome,
    average_risk,
    candidate_elements,
    evaluate_scenario,
    fault_probability,
    fault_probability_factors,
    instability_indicator,
    instability_probabilities,
    rank_deterministic_lll,
    rank_elements,
    sample_risk,
    score_sample,
    severity,
    tssi,
)
from .sampling import (
    DEFAULT_SAMPLES,
    FAULT_TYPE_PMF,
    MODE_BUS_FAULTS,
    MODE_DETERMINISTIC_LLL,
    MODE_LINE_FAULTS,
    CampaignConfig,
    ScenarioSample,
    cochran_size,
    make_scenario,
    sample_fault_type,
    sample_fct,
    sample_load_multipliers,
    sample_location,
    substream,
)
from .simulation import (
    Trajectory,
    electrical_power,
    max_angle_separation,
    simulate_scenario,
    step_rk4,
    swing_derivatives,
)

__all__ = [
    "__version__",
    "CdfParseError",
    "MachineIslandedError",
    "NumericalError",
    "PowerFlowError",
    "ValidationError",
    "INFINITE_ADMITTANCE",
    "FaultSpec",
    "FaultType",
    "PhaseMatrices",
    "build_phase_matrices",
    "bus_element_id",
    "effective_fault_admittance",
    "element_bus_id",
    "insert_fault_node",
    "kron_reduce",
    "thevenin_sequence_impedance",
    "Breaker",
    "BreakerRegistry",
    "BranchRecord",
    "BusRecord",
    "Machine",
    "PowerSystem",
    "ZeroSequenceConfig",
    "attach_dynamics",
    "build_breaker_registry",
    "build_ybus",
    "load_dynamics",
    "load_system",
    "parse_cdf",
    "serialize_cdf",
    "MachineInternal",
    "OperatingPoint",
    "init_machine_internals",
    "solve_power_flow",
    "RunManifest",
    "build_manifest",
    "emit_report",
    "emit_trajectory",
    "format_percent",
    "parse_report_csv",
    "render_report_csv",
    "render_report_json",
    "render_top5",
    "ExcludedElement",
    "RankingEntry",
    "RankingReport",
    "RiskSample",
    "SimOutcome",
    "average_risk",
    "candidate_elements",
    "evaluate_scenario",
    "fault_probability",
    "fault_probability_factors",
    "instability_indicator",
    "instability_probabilities",
    "rank_deterministic_lll",
    "rank_elements",
    "sample_risk",
    "score_sample",
    "severity",
    "tssi",
    "DEFAULT_SAMPLES",
    "FAULT_TYPE_PMF",
    "MODE_BUS_FAULTS",
    "MODE_DETERMINISTIC_LLL",
    "MODE_LINE_FAULTS",
    "CampaignConfig",
    "ScenarioSample",
    "cochran_size",
    "make_scenario",
    "sample_fault_type",
    "sample_fct",
    "sample_load_multipliers",
    "sample_location",
    "substream",
    "Trajectory",
    "electrical_power",
    "max_angle_separation",
    "simulate_scenario",
    "step_rk4",
    "swing_derivatives",
]
