"""JSON Schemas for the documents the command line writes."""

_NUM = {"type": "number"}
_UNIT = {"enum": ["hour", "day"]}

FOPDT_REPORT = {
    "type": "object",
    "required": ["method", "K", "T", "L", "time_unit", "rmse", "transfer_function"],
    "properties": {
        "thread_id": {"type": "string"},
        "method": {"enum": ["two_point", "area", "least_squares"]},
        "K": {"type": "number", "minimum": 0},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "L": {"type": "number", "minimum": 0},
        "time_unit": _UNIT,
        "rmse": {"type": "number", "minimum": 0},
        "transfer_function": {"type": "string"},
        "gain_source": {"enum": ["steady_state_reading", "fitted"]},
    },
}

LOGISTIC_REPORT = {
    "type": "object",
    "required": ["method", "K", "b", "n0", "time_unit", "rmse"],
    "properties": {
        "thread_id": {"type": "string"},
        "method": {"const": "logistic"},
        "K": {"type": "number", "minimum": 0},
        "b": _NUM,
        "n0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "time_unit": _UNIT,
        "rmse": {"type": "number", "minimum": 0},
    },
}

FIT_ERROR = {
    "type": "object",
    "required": ["thread_id", "method", "error", "message"],
    "properties": {
        "thread_id": {"type": "string"},
        "method": {"type": "string"},
        "error": {"type": "string"},
        "message": {"type": "string"},
    },
}

FIT_RECORD = {"oneOf": [FOPDT_REPORT, LOGISTIC_REPORT, FIT_ERROR]}

PREDICTION = {
    "type": "object",
    "required": ["t", "expected", "rounded", "time_unit"],
    "properties": {"t": _NUM, "expected": _NUM, "rounded": {"type": "integer"}, "time_unit": _UNIT},
}

ZIPF_REPORT = {
    "type": "object",
    "required": ["histogram", "fit"],
    "properties": {
        "histogram": {
            "type": "object",
            "required": ["counts", "total"],
            "properties": {
                "counts": {
                    "type": "object",
                    "patternProperties": {"^[1-9][0-9]*$": {"type": "integer", "minimum": 0}},
                    "additionalProperties": False,
                },
                "total": {"type": "integer", "minimum": 0},
            },
        },
        "fit": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["exponent", "log_intercept", "r_squared"],
                    "properties": {
                        "exponent": _NUM,
                        "log_intercept": _NUM,
                        "r_squared": {"type": "number", "minimum": 0, "maximum": 1},
                    },
                },
            ]
        },
        "gain_prior": {"type": "object"},
    },
}
