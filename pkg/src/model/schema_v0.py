"""JSON Schema definitions for seesawtrack scenario config and run summary v0.1.0."""

VERSION = "0.1.0"

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NON_NEGATIVE = {"type": "number", "minimum": 0}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "n_agents": {
            "type": "integer",
            "minimum": 0,
            "description": "Number of sensing agents A",
        },
        "n_targets": {
            "type": "integer",
            "minimum": 0,
            "description": "Number of targets T",
        },
        "groups": {
            "type": ["array", "null"],
            "items": {
                "type": "array",
                "items": {"type": "integer", "minimum": 0},
                "minItems": 1,
            },
            "description": "Partition of agent indices 0..A-1; null means one group",
        },
        "n_steps": {"type": "integer", "minimum": 1},
        "dt": _POSITIVE,
        "q_diag": {
            "type": "array",
            "items": _NON_NEGATIVE,
            "minItems": 6,
            "maxItems": 6,
            "description": "Process noise diagonal, position then velocity",
        },
        "sigmas": {
            "type": "array",
            "items": _POSITIVE,
            "minItems": 3,
            "maxItems": 3,
            "description": "Measurement noise sigma for range, azimuth, polar angle",
        },
        "detect_scale": _POSITIVE,
        "comm_divisor": _POSITIVE,
        "comm_divisor_alt": _POSITIVE,
        "a_k": _POSITIVE,
        "b_k": _POSITIVE,
        "gain_decay": _NON_NEGATIVE,
        "agent_speed": _POSITIVE,
        "target_step": _NON_NEGATIVE,
        "target_vert_range": _NON_NEGATIVE,
        "init_cube_halfwidth": _POSITIVE,
        "init_cov_diag": _POSITIVE,
        "seed": {"type": "integer", "minimum": 0},
        "seesaw_iters": {"type": "integer", "minimum": 1},
        "gradient_form": {"type": "string", "enum": ["log_det", "det"]},
        "peer_terms": {"type": "string", "enum": ["communicated", "all_known"]},
        "median_pooling": {"type": "string", "enum": ["pooled", "target_mean"]},
        "filter_order": {"type": "integer", "enum": [1, 2]},
        "log_raw": {"type": "boolean"},
    },
}

PROCESSING_STATUS_SCHEMA = {
    "type": "object",
    "required": ["info_count", "warning_count", "by_type"],
    "properties": {
        "info_count": {"type": "integer", "minimum": 0},
        "warning_count": {"type": "integer", "minimum": 0},
        "by_type": {
            "type": "object",
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
    },
}

VARIANT_SCHEMA = {
    "type": "object",
    "required": ["name", "config", "seeds", "mean_st", "mean_apt", "terminal_m_k"],
    "properties": {
        "name": {"type": "string"},
        "config": CONFIG_SCHEMA,
        "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "mean_st": {"type": "number", "minimum": 0},
        "mean_apt": {"type": "number", "minimum": 0},
        "terminal_m_k": {"type": ["number", "null"]},
        "mean_true_loss": {
            "type": ["number", "null"],
            "description": "Loss the executed actions achieved, mean over steps and replications",
        },
        "mean_estimated_loss": {
            "type": ["number", "null"],
            "description": "Agents' estimated loss of their chosen actions, same averaging",
        },
        "processing_status": PROCESSING_STATUS_SCHEMA,
    },
}

SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "preset", "base_seed", "n_reps", "generated_at", "variants"],
    "properties": {
        "version": {"type": "string", "const": VERSION},
        "preset": {
            "type": ["string", "null"],
            "description": "Preset name, or null for a custom experiment",
        },
        "base_seed": {"type": "integer", "minimum": 0},
        "n_reps": {"type": "integer", "minimum": 1},
        "generated_at": {"type": "string", "format": "date-time"},
        "variants": {"type": "array", "items": VARIANT_SCHEMA},
        "processing_status": PROCESSING_STATUS_SCHEMA,
        "analysis": {
            "type": "object",
            "description": "Preset-specific analysis: scaling fits, sign tests",
        },
    },
}
