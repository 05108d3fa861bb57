"""Named experiment presets."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

OUTPUT_TRAJECTORIES = "trajectories"
OUTPUT_METRICS = "metrics"
OUTPUT_SUMMARY = "summary"
OUTPUT_TIMING = "timing"

ANALYSIS_SCALING_FIT = "scaling_fit"
ANALYSIS_SIGN_TEST = "sign_test"

STANDARD_OUTPUTS = (OUTPUT_TRAJECTORIES, OUTPUT_METRICS, OUTPUT_SUMMARY)


@dataclass(frozen=True)
class Variant:
    """One scenario within an experiment.

    ``alt_divisor`` swaps the communication divisor for the config's
    ``comm_divisor_alt``.
    """

    name: str
    overrides: Dict[str, Any] = field(default_factory=dict)
    alt_divisor: bool = False


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    description: str
    variants: Tuple[Variant, ...]
    n_reps: int = 100
    outputs: Tuple[str, ...] = STANDARD_OUTPUTS
    analysis: Optional[str] = None


def partition(n_groups: int, size: int) -> List[List[int]]:
    """Consecutive agent ids split into equal groups."""
    return [list(range(g * size, (g + 1) * size)) for g in range(n_groups)]


def _variant(name: str, n_agents: int, n_targets: int, groups=None, **extra) -> Variant:
    overrides = {"n_agents": n_agents, "n_targets": n_targets, "groups": groups}
    overrides.update(extra)
    return Variant(name=name, overrides=overrides)


_TIMING_GRID = (
    [(a, 2) for a in (2, 5, 10, 15, 20, 25)]
    + [(5, t) for t in (3, 4, 5, 10, 15)]
)

_PRESET_LIST = [
    ExperimentPreset(
        name="fig-2a2t",
        description="Two communicating agents tracking two targets",
        variants=(_variant("A2", 2, 2),),
        n_reps=1,
    ),
    ExperimentPreset(
        name="fig-3a2t",
        description="Three communicating agents tracking two targets",
        variants=(_variant("A3", 3, 2),),
        n_reps=1,
    ),
    ExperimentPreset(
        name="groups-2x2",
        description="Two independent groups of two agents, two targets",
        variants=(_variant("G2x2", 4, 2, partition(2, 2)),),
        n_reps=1,
    ),
    ExperimentPreset(
        name="groups-2x4",
        description="Two independent groups of four agents, four targets",
        variants=(_variant("G2x4", 8, 4, partition(2, 4)),),
        n_reps=1,
    ),
    ExperimentPreset(
        name="median-T2",
        description="Median closest-agent distance, two targets, by agent count",
        variants=(
            _variant("A2", 2, 2),
            _variant("A5", 5, 2),
            _variant("A10", 10, 2),
            _variant("G5x2", 10, 2, partition(5, 2)),
        ),
    ),
    ExperimentPreset(
        name="median-T4-8x4",
        description="Median closest-agent distance, eight groups of four, four targets",
        variants=(_variant("G8x4", 32, 4, partition(8, 4)),),
    ),
    ExperimentPreset(
        name="timing-table",
        description="Simulation and agent processing time over agent and target counts",
        variants=tuple(_variant(f"A{a}_T{t}", a, t) for a, t in _TIMING_GRID),
        n_reps=5,
        outputs=STANDARD_OUTPUTS + (OUTPUT_TIMING,),
        analysis=ANALYSIS_SCALING_FIT,
    ),
    ExperimentPreset(
        name="commcompare",
        description="Default against more reliable communication, two agents, two targets",
        variants=(
            _variant("comm_default", 2, 2),
            Variant(name="comm_reliable", overrides={"n_agents": 2, "n_targets": 2, "groups": None},
                    alt_divisor=True),
        ),
        analysis=ANALYSIS_SIGN_TEST,
    ),
]

PRESETS: Dict[str, ExperimentPreset] = {p.name: p for p in _PRESET_LIST}


def get_preset(name: str) -> ExperimentPreset:
    """Look up a preset by name.

    Raises:
        ValueError: If no preset has that name
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"Unknown preset: {name} (known: {', '.join(sorted(PRESETS))})")
