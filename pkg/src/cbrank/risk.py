"""Risk indices and the element-ranking engine.

Per-sample risk is the product of the fault probability factors
(occurrence, location, type), a strict instability indicator, and a
severity derived from the transient stability index

    TSSI = (360 - delta_max) / (360 + delta_max)

which is negative exactly when the largest pairwise rotor-angle
separation exceeds 360 degrees.  Element campaigns average the sample
risks into R_A with a standard error, count unstable samples per fault
type, and rank elements by descending R_A (ties broken by element id).

Campaigns over elements can run in parallel worker processes; samples
within an element evaluate sequentially in index order, so results are
identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable

import numpy as np

from .errors import MachineIslandedError, PowerFlowError
from .faults import (
    FaultSpec,
    FaultType,
    build_phase_matrices,
    bus_element_id,
    element_bus_id,
)
from .network import PowerSystem, build_breaker_registry
from .powerflow import init_machine_internals, solve_power_flow
from .sampling import (
    FAULT_TYPE_PMF,
    MODE_BUS_FAULTS,
    MODE_DETERMINISTIC_LLL,
    MODE_LINE_FAULTS,
    CampaignConfig,
    ScenarioSample,
    make_scenario,
)
from .simulation import simulate_scenario

SEPARATION_THRESHOLD_DEG = 360.0
LINE_LOCATION_FACTOR = 0.01  # per-percent position resolution along a line

_PMF = dict(FAULT_TYPE_PMF)


def tssi(delta_max_deg: float) -> float:
    """Transient stability index; negative iff delta_max exceeds 360 deg."""
    if delta_max_deg < 0.0:
        raise ValueError(f"delta_max must be >= 0 degrees, got {delta_max_deg}")
    return (SEPARATION_THRESHOLD_DEG - delta_max_deg) / (
        SEPARATION_THRESHOLD_DEG + delta_max_deg
    )


def severity(tssi_value: float) -> float:
    """|TSSI| for negative TSSI (unstable), zero otherwise."""
    if abs(tssi_value) >= 1.0:
        raise ValueError(f"TSSI magnitude must be < 1, got {tssi_value}")
    return -tssi_value if tssi_value < 0.0 else 0.0


def instability_indicator(delta_max_deg: float) -> int:
    """1 iff the separation strictly exceeds 360 degrees."""
    if delta_max_deg < 0.0:
        raise ValueError(f"delta_max must be >= 0 degrees, got {delta_max_deg}")
    return 1 if delta_max_deg > SEPARATION_THRESHOLD_DEG else 0


def fault_probability_factors(
    mode: str, n_elements: int, ftype: FaultType
) -> tuple[float, float, float]:
    """(occurrence, location, type) probability factors for one sample.

    Line campaigns spread occurrence over the line count and location
    over 100 positions; at a bus the location factor is degenerate.
    Deterministic mode studies an assumed fault, so every factor is 1.
    """
    if n_elements < 1:
        raise ValueError(f"element count must be >= 1, got {n_elements}")
    if ftype not in _PMF:
        raise ValueError(f"unknown fault type: {ftype!r}")
    if mode == MODE_LINE_FAULTS:
        return 1.0 / n_elements, LINE_LOCATION_FACTOR, _PMF[ftype]
    if mode == MODE_BUS_FAULTS:
        return 1.0 / n_elements, 1.0, _PMF[ftype]
    if mode == MODE_DETERMINISTIC_LLL:
        return 1.0, 1.0, 1.0
    raise ValueError(f"unknown campaign mode: {mode!r}")


def fault_probability(mode: str, n_elements: int, ftype: FaultType) -> float:
    occ, loc, typ = fault_probability_factors(mode, n_elements, ftype)
    return occ * loc * typ


def sample_risk(pr_fault: float, indicator: int, severity_value: float) -> float:
    """Risk of one sample: probability times indicator times severity."""
    if not 0.0 <= pr_fault <= 1.0:
        raise ValueError(f"fault probability must be in [0, 1], got {pr_fault}")
    if indicator not in (0, 1):
        raise ValueError(f"indicator must be 0 or 1, got {indicator}")
    if not 0.0 <= severity_value < 1.0:
        raise ValueError(f"severity must be in [0, 1), got {severity_value}")
    return pr_fault * indicator * severity_value


def average_risk(risks: "list[float] | np.ndarray") -> tuple[float, float]:
    """Mean sample risk and its standard error (sample std over sqrt N)."""
    r = np.asarray(risks, dtype=float)
    if r.size == 0:
        raise ValueError("average_risk requires at least one sample")
    mean = float(r.mean())
    if r.size == 1:
        return mean, 0.0
    return mean, float(r.std(ddof=1) / math.sqrt(r.size))


def instability_probabilities(
    samples: "list[RiskSample]",
) -> tuple[float, float, float, float]:
    """(P_LGI, P_LLI, P_LLGI, P_LLLI): unstable counts per type over N."""
    n = len(samples)
    if n == 0:
        raise ValueError("instability_probabilities requires at least one sample")
    counts = {ft: 0 for ft, _ in FAULT_TYPE_PMF}
    for s in samples:
        if s.pr_instability:
            counts[s.ftype] += 1
    return (
        counts[FaultType.LG] / n,
        counts[FaultType.LL] / n,
        counts[FaultType.LLG] / n,
        counts[FaultType.LLL] / n,
    )


@dataclass(frozen=True)
class RiskSample:
    """Risk decomposition of one evaluated scenario."""

    element_id: str
    index: int
    ftype: FaultType
    delta_max_deg: float
    pr_occurrence: float
    pr_location: float
    pr_type: float
    pr_instability: int
    tssi: float
    severity: float
    r_i: float
    numerical_blowup: bool = False


@dataclass(frozen=True)
class SimOutcome:
    """What the scenario evaluator must produce for risk scoring."""

    delta_max_deg: float
    numerical_blowup: bool = False


Evaluator = Callable[[PowerSystem, ScenarioSample, CampaignConfig], SimOutcome]


def evaluate_scenario(
    system: PowerSystem, scenario: ScenarioSample, config: CampaignConfig
) -> SimOutcome:
    """Full chain: power flow at sampled loads, fault matrices, swing run."""
    op = solve_power_flow(system, load_multipliers=np.array(scenario.load_multipliers))
    internals = init_machine_internals(system, op)
    if scenario.mode == MODE_LINE_FAULTS:
        spec = FaultSpec(
            kind="line",
            element_id=scenario.element_id,
            ftype=scenario.ftype,
            location=scenario.location,
            zf_pu=config.zf_pu,
        )
    else:
        spec = FaultSpec(
            kind="bus",
            element_id=scenario.element_id,
            ftype=scenario.ftype,
            location=0.0,
            zf_pu=config.zf_pu,
        )
    matrices = build_phase_matrices(system, op, internals, spec)
    trajectory = simulate_scenario(
        matrices,
        internals,
        system.omega_s,
        scenario.fct_s,
        dt_s=config.dt_s,
        record=False,
    )
    return SimOutcome(
        delta_max_deg=trajectory.delta_max_deg,
        numerical_blowup=trajectory.numerical_blowup,
    )


def score_sample(
    scenario: ScenarioSample, outcome: SimOutcome, n_elements: int
) -> RiskSample:
    """Attach the risk decomposition to an evaluated scenario."""
    occ, loc, typ = fault_probability_factors(scenario.mode, n_elements, scenario.ftype)
    t = tssi(outcome.delta_max_deg)
    sev = severity(t)
    ind = instability_indicator(outcome.delta_max_deg)
    return RiskSample(
        element_id=scenario.element_id,
        index=scenario.index,
        ftype=scenario.ftype,
        delta_max_deg=outcome.delta_max_deg,
        pr_occurrence=occ,
        pr_location=loc,
        pr_type=typ,
        pr_instability=ind,
        tssi=t,
        severity=sev,
        r_i=sample_risk(occ * loc * typ, ind, sev),
        numerical_blowup=outcome.numerical_blowup,
    )


@dataclass(frozen=True)
class RankingEntry:
    """One ranked element with its aggregated risk statistics."""

    priority_rank: int
    element: str
    breakers: tuple[str, ...]
    r_a: float
    stderr: float
    n_samples: int
    n_unstable: int
    n_unstable_lg: int
    n_unstable_llg: int
    n_unstable_ll: int
    n_unstable_lll: int
    p_lgi: float
    p_lli: float
    p_llgi: float
    p_llli: float
    n_rejected: int
    n_blowups: int


@dataclass(frozen=True)
class ExcludedElement:
    """Element whose every scenario was rejected; kept out of the ranking."""

    element: str
    breakers: tuple[str, ...]
    n_rejected: int
    reasons: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class RankingReport:
    mode: str
    config: CampaignConfig
    entries: tuple[RankingEntry, ...]
    excluded: tuple[ExcludedElement, ...]
    rejected_by_element: tuple[tuple[str, int], ...]
    n_load_clamps: int
    n_fct_clamps: int


def candidate_elements(system: PowerSystem, mode: str) -> tuple[str, ...]:
    """Line ids for line campaigns; breaker-owning bus ids otherwise."""
    if mode == MODE_LINE_FAULTS:
        return tuple(br.branch_id for br in system.lines())
    registry = build_breaker_registry(system)
    return tuple(bus_element_id(b) for b in registry.buses_with_breakers())


@dataclass(frozen=True)
class _ElementOutcome:
    element_id: str
    samples: tuple[RiskSample, ...]
    n_rejected: int
    rejection_reasons: tuple[tuple[str, int], ...]
    n_load_clamps: int
    n_fct_clamps: int


def _evaluate_element(
    element_id: str,
    system: PowerSystem,
    config: CampaignConfig,
    evaluate: Evaluator,
    n_elements: int,
) -> _ElementOutcome:
    samples: list[RiskSample] = []
    reasons: dict[str, int] = {}
    n_load_clamps = 0
    n_fct_clamps = 0
    for index in range(config.n_samples):
        scenario = make_scenario(config, system, element_id, index)
        n_load_clamps += scenario.n_load_clamps
        n_fct_clamps += int(scenario.fct_clamped)
        try:
            outcome = evaluate(system, scenario, config)
        except PowerFlowError:
            reasons["powerflow"] = reasons.get("powerflow", 0) + 1
            continue
        except MachineIslandedError:
            reasons["islanding"] = reasons.get("islanding", 0) + 1
            continue
        samples.append(score_sample(scenario, outcome, n_elements))
    return _ElementOutcome(
        element_id=element_id,
        samples=tuple(samples),
        n_rejected=sum(reasons.values()),
        rejection_reasons=tuple(sorted(reasons.items())),
        n_load_clamps=n_load_clamps,
        n_fct_clamps=n_fct_clamps,
    )


def _breakers_for(system: PowerSystem, mode: str, element_id: str) -> tuple[str, ...]:
    registry = build_breaker_registry(system)
    if mode == MODE_LINE_FAULTS:
        return tuple(b.name for b in registry.for_line(element_id))
    return tuple(b.name for b in registry.at_bus(element_bus_id(element_id)))


def rank_elements(
    system: PowerSystem,
    config: CampaignConfig,
    evaluate: Evaluator = evaluate_scenario,
    n_workers: int = 1,
) -> RankingReport:
    """Run the campaign for every candidate element and rank by R_A.

    Elements evaluate independently (optionally across worker processes);
    the report is identical for any ``n_workers``.  An element whose
    scenarios were all rejected is excluded from the ranking and listed
    separately.  With a custom ``evaluate`` and ``n_workers > 1`` the
    callable must be picklable.
    """
    elements = candidate_elements(system, config.mode)
    n_elements = len(elements)
    job = partial(
        _evaluate_element,
        system=system,
        config=config,
        evaluate=evaluate,
        n_elements=n_elements,
    )
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(job, elements))
    else:
        outcomes = [job(e) for e in elements]

    scored: list[RankingEntry] = []
    excluded: list[ExcludedElement] = []
    for out in outcomes:
        breakers = _breakers_for(system, config.mode, out.element_id)
        if not out.samples:
            excluded.append(
                ExcludedElement(
                    element=out.element_id,
                    breakers=breakers,
                    n_rejected=out.n_rejected,
                    reasons=out.rejection_reasons,
                )
            )
            continue
        risks = [s.r_i for s in out.samples]
        r_a, stderr = average_risk(risks)
        p_lgi, p_lli, p_llgi, p_llli = instability_probabilities(list(out.samples))
        unstable_by_type = {ft: 0 for ft, _ in FAULT_TYPE_PMF}
        for s in out.samples:
            if s.pr_instability:
                unstable_by_type[s.ftype] += 1
        entry = RankingEntry(
            priority_rank=0,
            element=out.element_id,
            breakers=breakers,
            r_a=r_a,
            stderr=stderr,
            n_samples=len(out.samples),
            n_unstable=sum(unstable_by_type.values()),
            n_unstable_lg=unstable_by_type[FaultType.LG],
            n_unstable_llg=unstable_by_type[FaultType.LLG],
            n_unstable_ll=unstable_by_type[FaultType.LL],
            n_unstable_lll=unstable_by_type[FaultType.LLL],
            p_lgi=p_lgi,
            p_lli=p_lli,
            p_llgi=p_llgi,
            p_llli=p_llli,
            n_rejected=out.n_rejected,
            n_blowups=sum(1 for s in out.samples if s.numerical_blowup),
        )
        scored.append(entry)

    scored.sort(key=lambda e: (-e.r_a, e.element))
    entries = tuple(
        replace(entry, priority_rank=rank) for rank, entry in enumerate(scored, start=1)
    )
    return RankingReport(
        mode=config.mode,
        config=config,
        entries=entries,
        excluded=tuple(excluded),
        rejected_by_element=tuple(
            (out.element_id, out.n_rejected) for out in outcomes
        ),
        n_load_clamps=sum(out.n_load_clamps for out in outcomes),
        n_fct_clamps=sum(out.n_fct_clamps for out in outcomes),
    )


def rank_deterministic_lll(
    system: PowerSystem,
    config: CampaignConfig | None = None,
    evaluate: Evaluator = evaluate_scenario,
    n_workers: int = 1,
) -> RankingReport:
    """One bolted LLL per breaker-owning bus at forecast load, fct 0.9 s."""
    if config is None:
        config = CampaignConfig(mode=MODE_DETERMINISTIC_LLL, n_samples=1)
    elif config.mode != MODE_DETERMINISTIC_LLL or config.n_samples != 1:
        config = replace(config, mode=MODE_DETERMINISTIC_LLL, n_samples=1)
    return rank_elements(system, config, evaluate=evaluate, n_workers=n_workers)
