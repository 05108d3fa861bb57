"""Tests for CSV and summary JSON output."""

from datetime import datetime, timezone

import numpy as np
import pytest
from jsonschema import ValidationError

from src.model.config import ScenarioConfig
from src.model.schema_v0 import VERSION
from src.model.summary import RunSummary, VariantSummary
from src.serializer import results


def _summary(**kwargs):
    fields = dict(
        version=VERSION,
        preset="fig-2a2t",
        base_seed=0,
        n_reps=1,
        generated_at=datetime(2024, 1, 2, 3, 4, 5, tzinfo=timezone.utc),
        variants=[VariantSummary(name="A2", config=ScenarioConfig().to_dict(), seeds=[0],
                                 mean_st=1.5, mean_apt=0.01, terminal_m_k=2.25)],
    )
    fields.update(kwargs)
    return RunSummary(**fields)


class TestFormatFloat:
    """Tests for the fixed float format."""

    def test_nine_significant_digits(self):
        assert results.format_float(1 / 3) == "0.333333333"

    def test_integers_without_point(self):
        assert results.format_float(2.0) == "2"

    def test_nan(self):
        assert results.format_float(float("nan")) == "nan"


class TestCsv:
    """Tests for the CSV writers."""

    def test_trajectories(self):
        text = results.trajectories_csv([("A2", 0, [(0, 1, "agent", 0.5, -1.0, 2.0)])])
        assert text == "variant,replication,k,entity_id,kind,e,n,u\nA2,0,0,1,agent,0.5,-1,2\n"

    def test_metrics_columns_per_variant(self):
        text = results.metrics_csv({"A2": np.array([1.0, 2.0]), "A5": np.array([3.0, 4.5])})
        assert text.splitlines() == ["k,m_k_A2,m_k_A5", "0,1,3", "1,2,4.5"]

    def test_metrics_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            results.metrics_csv({"a": np.zeros(2), "b": np.zeros(3)})

    def test_timing(self):
        assert results.timing_csv([(2, 2, 1.25, 0.001)]) == "A,T,mean_st,mean_apt\n2,2,1.25,0.001\n"

    def test_lf_line_endings(self):
        assert "\r" not in results.metrics_csv({"a": np.zeros(3)})


class TestSummarySerializer:
    """Tests for summary.json."""

    def test_round_trip(self):
        serializer = results.SummarySerializer()
        summary = _summary(analysis={"sign_test": {"p_value": 0.01}})
        restored = serializer.deserialize(serializer.serialize(summary, validate=True))
        assert restored == summary

    def test_custom_run_has_null_preset(self):
        serializer = results.SummarySerializer()
        restored = serializer.deserialize(serializer.serialize(_summary(preset=None)))
        assert restored.preset is None

    def test_wrong_version_rejected(self):
        with pytest.raises(ValidationError):
            results.SummarySerializer().validate(_summary(version="9.9.9"))

    def test_invalid_variant_config_rejected(self):
        bad = _summary(variants=[VariantSummary(name="A2", config={"n_agents": -1}, seeds=[0],
                                                mean_st=1.0, mean_apt=0.1)])
        with pytest.raises(ValidationError):
            results.SummarySerializer().serialize(bad, validate=True)

    def test_variant_lookup(self):
        assert _summary().variant("A2").terminal_m_k == 2.25
        with pytest.raises(KeyError):
            _summary().variant("A9")


class TestWriteAtomic:
    """Tests for atomic file writes."""

    def test_writes_and_leaves_no_temp(self, tmp_path):
        path = tmp_path / "metrics.csv"
        results.write_atomic(path, "k\n0\n")
        assert path.read_bytes() == b"k\n0\n"
        assert not (tmp_path / "metrics.csv.tmp").exists()

    def test_missing_directory_raises(self, tmp_path):
        with pytest.raises(OSError):
            results.write_atomic(tmp_path / "missing" / "x.csv", "x")
