"""Monte-Carlo scenario sampling with reproducible per-sample streams.

Each scenario draws a fault type from the historical occurrence table,
a fault location (line campaigns), one load multiplier per loaded bus,
and a fault clearing time.  Draws come from a counter-based Philox
generator seeded from (campaign seed, element id hash, sample index), so
any single sample can be regenerated in isolation and the campaign is
bitwise reproducible regardless of how work is scheduled across workers.

Clamps keep the normal tails physical: multipliers at ``clamp_load_min``
(default 0) and clearing times at ``clamp_fct_min`` (default 0.05 s).
Clamp events are counted and surface in the run manifest.
"""

from __future__ import annotations

import hashlib
import math
import statistics
from dataclasses import asdict, dataclass

import numpy as np

from .faults import FaultType
from .network import PowerSystem

# relative occurrence of shunt fault types, most to least common
FAULT_TYPE_PMF: tuple[tuple[FaultType, float], ...] = (
    (FaultType.LG, 0.70),
    (FaultType.LLG, 0.15),
    (FaultType.LL, 0.10),
    (FaultType.LLL, 0.05),
)

MODE_LINE_FAULTS = "line_faults"
MODE_BUS_FAULTS = "bus_faults"
MODE_DETERMINISTIC_LLL = "deterministic_lll"
MODES = (MODE_LINE_FAULTS, MODE_BUS_FAULTS, MODE_DETERMINISTIC_LLL)

DEFAULT_CONFIDENCE = 0.95
DEFAULT_MARGIN = 0.02


def cochran_size(confidence: float, margin: float, p: float = 0.5) -> int:
    """Cochran sample size n = ceil(z^2 p (1-p) / e^2).

    ``z`` is the two-sided normal quantile for ``confidence``; ``p`` is
    the assumed proportion (0.5 maximizes the variance and hence n).
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    if margin <= 0.0:
        raise ValueError(f"margin of error must be > 0, got {margin}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"proportion must be in (0, 1), got {p}")
    z = statistics.NormalDist().inv_cdf(0.5 * (1.0 + confidence))
    return math.ceil(z * z * p * (1.0 - p) / (margin * margin))


DEFAULT_SAMPLES = cochran_size(DEFAULT_CONFIDENCE, DEFAULT_MARGIN, 0.5)


def substream(seed: int, element_id: str, index: int) -> np.random.Generator:
    """Independent generator for one (element, sample) pair.

    The element id enters through a stable hash so the stream depends
    only on the triple's values, not on enumeration order.
    """
    key = int.from_bytes(hashlib.sha256(element_id.encode()).digest()[:8], "big")
    seq = np.random.SeedSequence(entropy=(int(seed), key, int(index)))
    return np.random.Generator(np.random.Philox(seq))


def sample_fault_type(rng: np.random.Generator) -> FaultType:
    u = rng.random()
    acc = 0.0
    for ftype, prob in FAULT_TYPE_PMF:
        acc += prob
        if u < acc:
            return ftype
    return FAULT_TYPE_PMF[-1][0]


def sample_location(rng: np.random.Generator) -> float:
    """Fault position as a fraction of line length from the from-bus."""
    return float(rng.random())


def sample_load_multipliers(
    rng: np.random.Generator, n: int, sigma: float, floor: float
) -> tuple[np.ndarray, int]:
    """Per-bus multipliers ~ N(1, sigma), clamped at ``floor``.

    Returns the multipliers and how many draws the clamp touched.
    """
    raw = rng.normal(1.0, sigma, n)
    clamped = int(np.count_nonzero(raw < floor))
    return np.maximum(raw, floor), clamped


def sample_fct(
    rng: np.random.Generator, mean: float, sigma: float, floor: float
) -> tuple[float, bool]:
    raw = float(rng.normal(mean, sigma))
    return max(raw, floor), raw < floor


@dataclass(frozen=True)
class ScenarioSample:
    """One fully-drawn Monte-Carlo scenario.

    ``load_multipliers`` covers every bus in system order; buses without
    load keep multiplier 1.  ``location`` is None for bus faults.
    """

    element_id: str
    index: int
    mode: str
    ftype: FaultType
    location: float | None
    load_multipliers: tuple[float, ...]
    fct_s: float
    n_load_clamps: int
    fct_clamped: bool


@dataclass(frozen=True)
class CampaignConfig:
    """Campaign parameters; JSON config files mirror these fields."""

    mode: str
    n_samples: int = DEFAULT_SAMPLES
    seed: int = 42
    fct_mean_s: float = 0.9
    fct_sigma_s: float = 0.1
    clamp_fct_min: float = 0.05
    load_sigma: float = 0.1
    clamp_load_min: float = 0.0
    dt_s: float = 1e-3
    zf_pu: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for name in ("fct_mean_s", "fct_sigma_s", "load_sigma", "dt_s"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.clamp_fct_min <= 0.0:
            raise ValueError(f"clamp_fct_min must be > 0, got {self.clamp_fct_min}")
        if self.clamp_load_min < 0.0:
            raise ValueError(f"clamp_load_min must be >= 0, got {self.clamp_load_min}")
        if self.zf_pu < 0.0:
            raise ValueError(f"fault impedance must be >= 0, got {self.zf_pu}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def make_scenario(
    config: CampaignConfig,
    system: PowerSystem,
    element_id: str,
    index: int,
) -> ScenarioSample:
    """Draw scenario ``index`` for ``element_id`` under ``config``.

    Draw order is fixed (fault type, location, loads, clearing time) so
    a stream always maps to the same scenario.  ``deterministic_lll``
    mode bypasses the generator entirely: forecast loads, fct at the
    mean, a bolted three-phase fault.
    """
    n = system.n_bus
    has_load = [b.p_load_mw != 0.0 or b.q_load_mvar != 0.0 for b in system.buses]

    if config.mode == MODE_DETERMINISTIC_LLL:
        return ScenarioSample(
            element_id=element_id,
            index=index,
            mode=config.mode,
            ftype=FaultType.LLL,
            location=None,
            load_multipliers=(1.0,) * n,
            fct_s=config.fct_mean_s,
            n_load_clamps=0,
            fct_clamped=False,
        )

    rng = substream(config.seed, element_id, index)
    ftype = sample_fault_type(rng)
    location = sample_location(rng) if config.mode == MODE_LINE_FAULTS else None
    drawn, n_clamps = sample_load_multipliers(
        rng, sum(has_load), config.load_sigma, config.clamp_load_min
    )
    multipliers = np.ones(n)
    multipliers[np.flatnonzero(has_load)] = drawn
    fct_s, fct_clamped = sample_fct(
        rng, config.fct_mean_s, config.fct_sigma_s, config.clamp_fct_min
    )
    return ScenarioSample(
        element_id=element_id,
        index=index,
        mode=config.mode,
        ftype=ftype,
        location=location,
        load_multipliers=tuple(float(m) for m in multipliers),
        fct_s=fct_s,
        n_load_clamps=n_clamps,
        fct_clamped=fct_clamped,
    )
