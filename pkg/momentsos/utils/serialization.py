"""
Serialization Utilities - JSON-ready conversion of numbers, arrays and results
"""
import json
import math

import numpy as np


def json_float(value):
    """Encode a float for JSON; non-finite values become 'inf', '-inf' or 'nan'."""
    if value is None:
        return None
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return value


def to_jsonable(obj):
    """Recursively convert results, numpy values and tuples to JSON-ready data."""
    if hasattr(obj, 'to_dict'):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return json_float(obj)
    return obj


def dumps(obj):
    """Deterministic JSON text (sorted keys, full float precision)."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2)
