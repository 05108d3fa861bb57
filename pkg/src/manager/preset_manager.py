"""Experiment execution: variants, aggregates, analysis and result files."""

import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.stats import binomtest

from src.manager import simulation_manager
from src.model import preset as presets
from src.model.config import ScenarioConfig
from src.model.metrics import ReplicationResult
from src.model.preset import ExperimentPreset, Variant
from src.model.schema_v0 import VERSION
from src.model.summary import RunSummary, VariantSummary
from src.serializer import results as results_io
from src.util.error_handling import ErrorHandler

logger = logging.getLogger(__name__)

# Terminal m_k averages the last 1/8 of the run (500 of 4000 steps)
TERMINAL_FRACTION = 8
SIGN_TEST_ALPHA = 0.05


@dataclass
class VariantOutcome:
    """Replications of one variant and the aggregates drawn from them."""

    variant: Variant
    config: ScenarioConfig
    results: List[ReplicationResult]
    m_k: np.ndarray

    @property
    def mean_st(self) -> float:
        return float(np.mean([r.total_time for r in self.results]))

    @property
    def mean_apt(self) -> float:
        return float(np.mean([r.mean_apt() for r in self.results]))

    @property
    def mean_true_loss(self) -> Optional[float]:
        return _mean_or_none(r.mean_true_loss() for r in self.results)

    @property
    def mean_estimated_loss(self) -> Optional[float]:
        return _mean_or_none(r.mean_estimated_loss() for r in self.results)

    @property
    def terminal_m_k(self) -> Optional[float]:
        value = terminal_mean(self.m_k)
        return None if not np.isfinite(value) else value

    def processing_status(self) -> Dict[str, Any]:
        ledger = ErrorHandler()
        for r in self.results:
            ledger.merge_counts(r.processing_status.get("by_type", {}))
        return ledger.get_processing_summary()


def _mean_or_none(values: Iterable[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def terminal_mean(series: np.ndarray) -> float:
    """Mean of the last 1/8 of a series (at least one value)."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        return float("nan")
    window = max(1, series.size // TERMINAL_FRACTION)
    return float(np.mean(series[-window:]))


def variant_config(base: ScenarioConfig, variant: Variant) -> ScenarioConfig:
    """Apply a variant's overrides to a base config.

    Unlike ``with_overrides``, None values here do replace (a variant can
    clear ``groups``).
    """
    data = base.to_dict()
    data.update(variant.overrides)
    if variant.alt_divisor:
        data["comm_divisor"] = base.comm_divisor_alt
    return ScenarioConfig.from_dict(data)


def run_variants(base: ScenarioConfig, variants: Sequence[Variant], n_reps: int,
                 base_seed: int, parallelism: int = 1,
                 log_raw: bool = False) -> List[VariantOutcome]:
    """Run every variant with the same replication seeds."""
    outcomes = []
    for variant in variants:
        cfg = variant_config(base, variant)
        logger.info("Variant %s: %d replications of %d steps", variant.name, n_reps, cfg.n_steps)
        runs = simulation_manager.run_replications(cfg, n_reps, base_seed, parallelism, log_raw)
        m_k = simulation_manager.median_min_distance(runs, cfg.median_pooling)
        outcomes.append(VariantOutcome(variant=variant, config=cfg, results=runs, m_k=m_k))
    return outcomes


def r_squared(x: np.ndarray, y: np.ndarray, degree: int) -> float:
    """Coefficient of determination of a least-squares polynomial fit."""
    coeffs = np.polyfit(x, y, degree)
    residual = y - np.polyval(coeffs, x)
    total = float(np.sum((y - np.mean(y)) ** 2))
    if total == 0.0:
        return 1.0
    return 1.0 - float(np.sum(residual ** 2)) / total


def _fit(x: Sequence[float], y: Sequence[float]) -> Dict[str, Any]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    linear = r_squared(x, y, 1)
    quadratic = r_squared(x, y, 2) if x.size > 2 else linear
    return {
        "x": x.tolist(),
        "y": y.tolist(),
        "linear_r2": linear,
        "quadratic_r2": quadratic,
        "quadratic_gain": quadratic - linear,
    }


def scaling_fits(outcomes: Sequence[VariantOutcome], fixed_targets: int = 2,
                 fixed_agents: int = 5) -> Dict[str, Any]:
    """Linear and quadratic fits of ST and APT over agent and target counts.

    The agent sweep uses variants with ``fixed_targets`` targets, the
    target sweep variants with ``fixed_agents`` agents.
    """
    by_agents = sorted((o for o in outcomes if o.config.n_targets == fixed_targets),
                       key=lambda o: o.config.n_agents)
    by_targets = sorted((o for o in outcomes if o.config.n_agents == fixed_agents),
                        key=lambda o: o.config.n_targets)
    fits = {}
    for label, sweep, key in (("agents", by_agents, "n_agents"),
                              ("targets", by_targets, "n_targets")):
        if len(sweep) < 2:
            continue
        x = [getattr(o.config, key) for o in sweep]
        fits[f"st_vs_{label}"] = _fit(x, [o.mean_st for o in sweep])
        fits[f"apt_vs_{label}"] = _fit(x, [o.mean_apt for o in sweep])
    return fits


def per_replication_terminal(outcome: VariantOutcome) -> List[float]:
    """Terminal mean closest-agent distance of each replication, targets averaged."""
    values = []
    for r in outcome.results:
        matrix = r.min_distance_matrix()
        values.append(terminal_mean(matrix.mean(axis=1)) if matrix.shape[1] else float("nan"))
    return values


def sign_test(baseline: VariantOutcome, candidate: VariantOutcome) -> Dict[str, Any]:
    """One-sided sign test that ``candidate`` ends closer to the targets.

    Replications are paired by seed; ties are dropped.
    """
    pairs = zip(per_replication_terminal(baseline), per_replication_terminal(candidate))
    diffs = [b - c for b, c in pairs if np.isfinite(b) and np.isfinite(c) and b != c]
    successes = sum(1 for d in diffs if d > 0)
    trials = len(diffs)
    p_value = binomtest(successes, trials, 0.5, alternative="greater").pvalue if trials else 1.0
    return {
        "baseline": baseline.variant.name,
        "candidate": candidate.variant.name,
        "successes": successes,
        "trials": trials,
        "p_value": float(p_value),
        "candidate_better": bool(p_value < SIGN_TEST_ALPHA),
    }


def analyze(preset: Optional[ExperimentPreset], outcomes: Sequence[VariantOutcome]) -> Dict[str, Any]:
    if preset is None or preset.analysis is None:
        return {}
    if preset.analysis == presets.ANALYSIS_SCALING_FIT:
        return {"scaling_fit": scaling_fits(outcomes)}
    if preset.analysis == presets.ANALYSIS_SIGN_TEST and len(outcomes) >= 2:
        return {"sign_test": sign_test(outcomes[0], outcomes[1])}
    return {}


def build_summary(preset_name: Optional[str], base_seed: int, n_reps: int,
                  outcomes: Sequence[VariantOutcome],
                  analysis: Optional[Dict[str, Any]] = None) -> RunSummary:
    variants = []
    overall = ErrorHandler()
    for o in outcomes:
        status = o.processing_status()
        overall.merge_counts(status["by_type"])
        variants.append(VariantSummary(
            name=o.variant.name,
            config=o.config.to_dict(),
            seeds=[r.seed for r in o.results],
            mean_st=o.mean_st,
            mean_apt=o.mean_apt,
            terminal_m_k=o.terminal_m_k,
            mean_true_loss=o.mean_true_loss,
            mean_estimated_loss=o.mean_estimated_loss,
            processing_status=status,
        ))
    return RunSummary(
        version=VERSION,
        preset=preset_name,
        base_seed=base_seed,
        n_reps=n_reps,
        generated_at=datetime.now(timezone.utc),
        variants=variants,
        processing_status=overall.get_processing_summary(),
        analysis=analysis or {},
    )


def write_outputs(out_dir: Path, outcomes: Sequence[VariantOutcome], summary: RunSummary,
                  outputs: Sequence[str] = presets.STANDARD_OUTPUTS) -> List[Path]:
    """Write the requested result files into ``out_dir``.

    Raises:
        OSError: If the directory or a file cannot be written
        ValidationError: If the summary does not match its schema
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    if presets.OUTPUT_TRAJECTORIES in outputs:
        blocks = [(o.variant.name, r, run.trajectories)
                  for o in outcomes for r, run in enumerate(o.results) if run.trajectories]
        path = out_dir / "trajectories.csv"
        results_io.write_atomic(path, results_io.trajectories_csv(blocks))
        written.append(path)

    if presets.OUTPUT_METRICS in outputs:
        path = out_dir / "metrics.csv"
        results_io.write_atomic(path, results_io.metrics_csv({o.variant.name: o.m_k for o in outcomes}))
        written.append(path)

    if presets.OUTPUT_TIMING in outputs:
        rows = [(o.config.n_agents, o.config.n_targets, o.mean_st, o.mean_apt) for o in outcomes]
        path = out_dir / "timing.csv"
        results_io.write_atomic(path, results_io.timing_csv(rows))
        written.append(path)

    if presets.OUTPUT_SUMMARY in outputs:
        path = out_dir / "summary.json"
        text = results_io.SummarySerializer().serialize(summary, validate=True)
        results_io.write_atomic(path, text + "\n")
        written.append(path)
    return written


def run_experiment(base: ScenarioConfig, variants: Sequence[Variant], n_reps: int,
                   base_seed: int, out_dir: Path, parallelism: int = 1,
                   log_raw: bool = False,
                   preset: Optional[ExperimentPreset] = None) -> List[Path]:
    """Run variants, analyze them, and write the result files."""
    outcomes = run_variants(base, variants, n_reps, base_seed, parallelism, log_raw)
    summary = build_summary(preset.name if preset else None, base_seed, n_reps, outcomes,
                            analyze(preset, outcomes))
    outputs = preset.outputs if preset else presets.STANDARD_OUTPUTS
    return write_outputs(out_dir, outcomes, summary, outputs)


def run_preset(name: str, seed: int, out_dir: Path, base: Optional[ScenarioConfig] = None,
               n_reps: Optional[int] = None, parallelism: int = 1,
               log_raw: bool = False) -> List[Path]:
    """Run a named preset and write its result files.

    Args:
        name: Preset name
        seed: Base seed; replication r uses seed + r
        out_dir: Directory for the result files
        base: Config the preset's variants override; defaults otherwise
        n_reps: Replication count; the preset's own count if None
        parallelism: Worker processes for replications
        log_raw: Keep trajectories of every replication

    Raises:
        ValueError: Unknown preset
        OSError: Unwritable output directory
    """
    preset = presets.get_preset(name)
    base = base or ScenarioConfig()
    reps = n_reps or preset.n_reps
    logger.info("Preset %s: seed %d, %d replications", name, seed, reps)
    written = run_experiment(base, preset.variants, reps, seed, out_dir,
                             parallelism, log_raw, preset)
    logger.info("Preset %s: wrote %d files to %s", name, len(written), out_dir)
    return written


def run_custom(cfg: ScenarioConfig, seed: int, out_dir: Path, n_reps: int = 1,
               parallelism: int = 1, log_raw: bool = False) -> List[Path]:
    """Run the configured scenario as a single-variant experiment."""
    return run_experiment(cfg, [Variant(name="custom")], n_reps, seed, out_dir,
                          parallelism, log_raw)
