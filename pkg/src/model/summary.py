"""Run summary data model."""

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional


@dataclass
class VariantSummary:
    """Aggregates of one experiment variant over its replications."""

    name: str
    config: Dict[str, Any]
    seeds: List[int]
    mean_st: float
    mean_apt: float
    terminal_m_k: Optional[float] = None
    mean_true_loss: Optional[float] = None
    mean_estimated_loss: Optional[float] = None
    processing_status: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        result = {
            "name": self.name,
            "config": self.config,
            "seeds": list(self.seeds),
            "mean_st": self.mean_st,
            "mean_apt": self.mean_apt,
            "terminal_m_k": self.terminal_m_k,
            "mean_true_loss": self.mean_true_loss,
            "mean_estimated_loss": self.mean_estimated_loss,
        }
        if self.processing_status is not None:
            result["processing_status"] = self.processing_status
        return result

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VariantSummary":
        return cls(
            name=data["name"],
            config=data["config"],
            seeds=list(data["seeds"]),
            mean_st=data["mean_st"],
            mean_apt=data["mean_apt"],
            terminal_m_k=data.get("terminal_m_k"),
            mean_true_loss=data.get("mean_true_loss"),
            mean_estimated_loss=data.get("mean_estimated_loss"),
            processing_status=data.get("processing_status"),
        )


@dataclass
class RunSummary:
    """Everything summary.json records about one experiment."""

    # Required fields
    version: str
    preset: Optional[str]
    base_seed: int
    n_reps: int
    generated_at: datetime
    variants: List[VariantSummary]

    # Optional fields
    processing_status: Optional[Dict[str, Any]] = None
    analysis: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert RunSummary to dictionary for JSON serialization."""
        result = {
            "version": self.version,
            "preset": self.preset,
            "base_seed": self.base_seed,
            "n_reps": self.n_reps,
            "generated_at": self.generated_at.isoformat(),
            "variants": [v.to_dict() for v in self.variants],
        }
        if self.processing_status is not None:
            result["processing_status"] = self.processing_status
        if self.analysis:
            result["analysis"] = self.analysis
        return result

    def variant(self, name: str) -> VariantSummary:
        for v in self.variants:
            if v.name == name:
                return v
        raise KeyError(name)
