"""Tests for JSON schema validation."""

import pytest
from jsonschema import ValidationError, validate

from src.model.config import ScenarioConfig
from src.model.schema_v0 import CONFIG_SCHEMA, SUMMARY_SCHEMA, VERSION


def _valid_summary():
    return {
        "version": VERSION,
        "preset": "fig-2a2t",
        "base_seed": 0,
        "n_reps": 1,
        "generated_at": "2025-11-06T19:30:00+00:00",
        "variants": [
            {
                "name": "A2",
                "config": ScenarioConfig().to_dict(),
                "seeds": [0],
                "mean_st": 1.2,
                "mean_apt": 0.001,
                "terminal_m_k": 0.8,
            }
        ],
    }


class TestConfigSchema:
    """Test scenario schema validation."""

    def test_defaults_pass(self):
        validate(instance=ScenarioConfig().to_dict(), schema=CONFIG_SCHEMA)

    def test_empty_object_passes(self):
        validate(instance={}, schema=CONFIG_SCHEMA)

    def test_unknown_field_fails(self):
        with pytest.raises(ValidationError):
            validate(instance={"speed": 2}, schema=CONFIG_SCHEMA)

    def test_filter_order_enum(self):
        with pytest.raises(ValidationError):
            validate(instance={"filter_order": 3}, schema=CONFIG_SCHEMA)

    def test_q_diag_length(self):
        with pytest.raises(ValidationError):
            validate(instance={"q_diag": [0.1] * 5}, schema=CONFIG_SCHEMA)


class TestSummarySchema:
    """Test summary schema validation."""

    def test_valid_summary_passes(self):
        validate(instance=_valid_summary(), schema=SUMMARY_SCHEMA)

    def test_missing_required_field_fails(self):
        summary = _valid_summary()
        del summary["base_seed"]
        with pytest.raises(ValidationError):
            validate(instance=summary, schema=SUMMARY_SCHEMA)

    def test_null_terminal_allowed(self):
        summary = _valid_summary()
        summary["variants"][0]["terminal_m_k"] = None
        validate(instance=summary, schema=SUMMARY_SCHEMA)

    def test_negative_time_fails(self):
        summary = _valid_summary()
        summary["variants"][0]["mean_st"] = -1.0
        with pytest.raises(ValidationError):
            validate(instance=summary, schema=SUMMARY_SCHEMA)

    def test_processing_status_shape(self):
        summary = _valid_summary()
        summary["processing_status"] = {"info_count": 1, "warning_count": 0}
        with pytest.raises(ValidationError):
            validate(instance=summary, schema=SUMMARY_SCHEMA)
