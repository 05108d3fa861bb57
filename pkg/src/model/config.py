"""Scenario configuration data model."""

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema

from src.model.schema_v0 import CONFIG_SCHEMA
from src.tracking.ekf2 import MotionModel, NoiseModel

_VALIDATOR = jsonschema.Draft202012Validator(CONFIG_SCHEMA)


@dataclass
class ScenarioConfig:
    """Every model constant of one simulated scenario.

    Defaults reproduce the two-agent, two-target study.
    """

    n_agents: int = 2
    n_targets: int = 2
    groups: Optional[List[List[int]]] = None
    n_steps: int = 4000
    dt: float = 0.1
    q_diag: List[float] = field(default_factory=lambda: [0.03, 0.03, 0.03, 0.01, 0.01, 0.01])
    sigmas: List[float] = field(default_factory=lambda: [0.01, 0.01, 0.01])
    detect_scale: float = 100.0
    comm_divisor: float = 200.0
    comm_divisor_alt: float = 2000.0
    a_k: float = 1.0
    b_k: float = 0.1
    gain_decay: float = 0.0
    agent_speed: float = 1.0
    target_step: float = 0.1
    target_vert_range: float = 0.15
    init_cube_halfwidth: float = 4.0
    init_cov_diag: float = 1.0
    seed: int = 0
    seesaw_iters: int = 2
    gradient_form: str = "log_det"
    peer_terms: str = "communicated"
    median_pooling: str = "pooled"
    filter_order: int = 2
    log_raw: bool = False

    def __post_init__(self):
        self._check_groups()

    @classmethod
    def from_json_file(cls, config_path: Path) -> "ScenarioConfig":
        """Load configuration from JSON file.

        Args:
            config_path: Path to JSON configuration file

        Returns:
            ScenarioConfig with defaults for absent fields

        Raises:
            FileNotFoundError: If config file doesn't exist
            json.JSONDecodeError: If JSON is malformed
            ValueError: If a field is unknown or violates its constraints
        """
        config_path = Path(config_path)
        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        try:
            with open(config_path, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise json.JSONDecodeError(f"Invalid JSON in config file {config_path}: {e.msg}", e.doc, e.pos)

        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        """Create a ScenarioConfig from a dictionary with validation.

        Raises:
            ValueError: Message starts with the offending field name
        """
        if not isinstance(data, dict):
            raise ValueError("Configuration must be a JSON object")
        validate_config_dict(data)
        return cls(**data)

    @classmethod
    def get_default_config_path(cls) -> Path:
        """Get default configuration file path."""
        return Path("./scenario.json")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_overrides(self, **overrides: Any) -> "ScenarioConfig":
        """Copy with some fields replaced; None values are ignored.

        Raises:
            ValueError: If an override names an unknown field or is invalid
        """
        known = {f.name for f in fields(self)}
        changes = {k: v for k, v in overrides.items() if v is not None}
        unknown = sorted(set(changes) - known)
        if unknown:
            raise ValueError(f"{unknown[0]}: unknown configuration field")
        merged = self.to_dict()
        merged.update(changes)
        validate_config_dict(merged)
        return replace(self, **changes)

    def agent_groups(self) -> List[List[int]]:
        """Agent groups in id order; one group holds everyone if unset."""
        if self.groups is None:
            return [list(range(self.n_agents))] if self.n_agents else []
        return [sorted(g) for g in self.groups]

    def group_of(self) -> Dict[int, int]:
        """Map each agent id to its group index."""
        return {agent: g for g, members in enumerate(self.agent_groups()) for agent in members}

    def motion_model(self) -> MotionModel:
        return MotionModel.constant_velocity(self.dt, self.q_diag)

    def noise_model(self) -> NoiseModel:
        return NoiseModel.from_sigmas(*self.sigmas)

    def _check_groups(self) -> None:
        if self.groups is None:
            return
        members = [agent for group in self.groups for agent in group]
        if sorted(members) != list(range(self.n_agents)):
            raise ValueError(
                f"groups: must partition agent indices 0..{self.n_agents - 1}, got {self.groups}"
            )


def validate_config_dict(data: Dict[str, Any]) -> None:
    """Validate a config dictionary against CONFIG_SCHEMA.

    Raises:
        ValueError: For the first violation, prefixed by its field name
    """
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: list(e.absolute_path))
    if not errors:
        return
    error = errors[0]
    if error.validator == "additionalProperties":
        unknown = sorted(set(data) - set(CONFIG_SCHEMA["properties"]))
        raise ValueError(f"{unknown[0]}: unknown configuration field")
    field_name = error.absolute_path[0] if error.absolute_path else "config"
    raise ValueError(f"{field_name}: {error.message}")
