#!/usr/bin/env python3
"""
Grid File Validator
Validates *.grid simulation files against the schema and the scenario rules
Includes fuzzy matching for typo detection in family and statistic names
"""
import json
from difflib import get_close_matches
from typing import Dict, List, Optional, Tuple

from jsonschema import ValidationError, validate

from estimate.errors import GridError
from estimate.types import fraction_index

FAMILY_NAMES = ["clayton", "gumbel"]
STATISTIC_NAMES = ["S_nm", "S_n"]
MODE_NAMES = ["iid", "ar1"]


# =============================================================================
# JSON Schema Definition for *.grid files
# =============================================================================
_MARGIN = {
    "type": "object",
    "required": ["mean", "sd"],
    "properties": {
        "mean": {"type": "number"},
        "sd": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

# Run settings: allowed at grid level and overridable per block
_SETTINGS = {
    "replications": {"type": "integer", "minimum": 1},
    "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "B": {"type": "integer", "minimum": 1},
    "multipliers": {"type": "string", "enum": ["iid", "dependent"]},
    "bandwidth": {"type": ["integer", "null"], "minimum": 1},
    "derivative_scaling": {"type": "string", "enum": ["printed", "standard"]},
    "statistics": {
        "type": "array",
        "minItems": 1,
        "uniqueItems": True,
        "items": {"type": "string"},
    },
    "margin_before": _MARGIN,
    "margin_after": _MARGIN,
}


def _axis(item_schema: Dict) -> Dict:
    return {"type": "array", "items": item_schema}


GRID_SCHEMA = {
    "type": "object",
    "required": ["name", "seed", "blocks"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        **_SETTINGS,
        # Block schema: every axis is a list, the cells are their product
        "blocks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "d", "family", "tau_before", "b"],
                "properties": {
                    "n": _axis({"type": "integer", "minimum": 2}),
                    "d": _axis({"type": "integer", "minimum": 2}),
                    "family": _axis({"type": "string"}),
                    "tau_before": _axis({"type": "number", "minimum": 0, "exclusiveMaximum": 1}),
                    "tau_after": _axis({"type": "number", "minimum": 0, "exclusiveMaximum": 1}),
                    "b": _axis({"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}),
                    "t": _axis({"type": "number", "minimum": 0, "maximum": 1}),
                    "mode": _axis({"type": "string", "enum": MODE_NAMES}),
                    **_SETTINGS,
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


# =============================================================================
# Name suggestions for families and statistics
# =============================================================================

def _name_key(text: str) -> str:
    return text.lower().replace("_", "").replace("-", "")


def suggest_name(name: str, valid_names: List[str], cutoff: float = 0.6) -> Optional[str]:
    """Closest valid name ignoring case, '_' and '-' ("snm" -> "S_nm"), None below cutoff"""
    keyed = {_name_key(valid): valid for valid in valid_names}
    match = get_close_matches(_name_key(name), list(keyed), n=1, cutoff=cutoff)
    return keyed[match[0]] if match else None


def _unknown(kind: str, name: str, valid_names: List[str], where: str) -> str:
    similar = suggest_name(name, valid_names)
    if similar:
        return f"{where}: {kind} '{name}' does not exist (did you mean '{similar}'?)"
    return f"{where}: {kind} '{name}' does not exist"


# =============================================================================
# Semantic checks
# =============================================================================

def _check_block(block: Dict, grid: Dict, where: str) -> List[str]:
    errors = []
    for family in block.get("family", []):
        if family not in FAMILY_NAMES:
            errors.append(_unknown("Family", family, FAMILY_NAMES, where))

    for stat in block.get("statistics", grid.get("statistics", ["S_nm"])):
        if stat not in STATISTIC_NAMES:
            errors.append(_unknown("Statistic", stat, STATISTIC_NAMES, where))

    for n in block.get("n", []):
        for b in block.get("b", []):
            m = fraction_index(n, b)
            if not 1 <= m <= n - 1:
                errors.append(f"{where}: marginal break floor({n}*{b}) = {m} outside [1, {n - 1}]")
        for t in block.get("t", [1.0]):
            k = fraction_index(n, t)
            if 0 < t < 1 and not 1 <= k <= n - 1:
                errors.append(f"{where}: copula break floor({n}*{t}) = {k} outside [1, {n - 1}]")
        if n < 4:
            errors.append(f"{where}: n = {n} is below the bootstrap minimum of 4")

    multipliers = block.get("multipliers", grid.get("multipliers", "iid"))
    bandwidth = block.get("bandwidth", grid.get("bandwidth"))
    if multipliers == "dependent" and bandwidth is not None:
        for n in block.get("n", []):
            if bandwidth >= n:
                errors.append(f"{where}: bandwidth {bandwidth} must be below n = {n}")
    return errors


# =============================================================================
# Main Validation Function
# =============================================================================

def validate_grid_data(data: Dict) -> Tuple[bool, List[str]]:
    """
    Validate an already parsed grid

    Validation checks:
    1. JSON schema validation
    2. Family and statistic names exist (with typo suggestions)
    3. Break fractions map to interior indices for every n
    4. Dependent-multiplier bandwidth below every n

    Returns: (is_valid, list_of_errors)
    """
    errors = []
    try:
        validate(instance=data, schema=GRID_SCHEMA)
    except ValidationError as e:
        path = ".".join(str(p) for p in e.path) if e.path else "root"
        errors.append(f"Schema error: {e.message} at {path}")
        return False, errors

    for index, block in enumerate(data.get("blocks", [])):
        errors.extend(_check_block(block, data, f"Block {index}"))
    return (len(errors) == 0, errors)


def validate_grid_file(file_path: str) -> Tuple[bool, List[str]]:
    """Load a grid file and validate it; (is_valid, list_of_errors)"""
    try:
        with open(file_path, "r") as f:
            data = json.load(f)
    except FileNotFoundError:
        return False, [f"Grid file '{file_path}' not found"]
    except json.JSONDecodeError as e:
        return False, [f"JSON syntax error: {str(e)}"]
    return validate_grid_data(data)


def load_grid(file_path: str) -> Dict:
    """Parsed grid, or GridError listing every problem found"""
    is_valid, errors = validate_grid_file(file_path)
    if not is_valid:
        raise GridError("; ".join(errors))
    with open(file_path, "r") as f:
        return json.load(f)
