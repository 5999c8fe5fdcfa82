"""JSON schemas for CLI inputs.  Unknown keys are rejected everywhere."""

from __future__ import annotations

MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
VECTOR = {"type": "array", "items": {"type": "number"}}

POLY = {
    "type": "object",
    "propertyNames": {"pattern": r"^\(\s*\d+\s*(,\s*\d+\s*)*,?\s*\)$"},
    "additionalProperties": {"type": "number"},
}

FIELD = {
    "type": "object",
    "required": ["dim", "kind"],
    "additionalProperties": False,
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "size": {"type": "integer", "minimum": 1},
        "kind": {"enum": ["Scalar", "Vector", "OneForm", "TwoForm", "ThreeForm", "Bivector", "AlgebroidSection"]},
        "components": {"type": "object", "additionalProperties": POLY},
    },
}

CHART = {
    "type": "object",
    "required": ["dim"],
    "additionalProperties": False,
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "angles": {"type": "integer", "minimum": 0},
    },
}

SPACE = {
    "type": "object",
    "required": ["dimE"],
    "additionalProperties": False,
    "properties": {
        "dimE": {"type": "integer", "minimum": 1},
        "pairing": MATRIX,
    },
}

_CONSTRUCT_KINDS = ["graph_flat", "graph_sharp", "explicit", "direct_sum"]

LINEAR = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {
        "spec": {
            "type": "object",
            "required": ["construct"],
            "additionalProperties": False,
            "properties": {
                "space": SPACE,
                "construct": {"$ref": "#/$defs/construct"},
            },
            "if": {"properties": {"construct": {"properties": {"kind": {"const": "direct_sum"}}}}},
            "else": {"required": ["space"]},
        },
        "construct": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": _CONSTRUCT_KINDS},
                "Q": MATRIX,
                "F": MATRIX,
                "P": MATRIX,
                "basis": MATRIX,
                "parts": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/spec"}},
            },
            "allOf": [
                {"if": {"properties": {"kind": {"const": "graph_sharp"}}}, "then": {"required": ["P"]}},
                {"if": {"properties": {"kind": {"const": "explicit"}}}, "then": {"required": ["basis"]}},
                {"if": {"properties": {"kind": {"const": "direct_sum"}}}, "then": {"required": ["parts"]}},
            ],
        },
    },
    "$ref": "#/$defs/spec",
}

SEQUENCE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": LINEAR["$defs"],
    "type": "object",
    "required": ["kind", "levels", "links"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["ascending", "projective"]},
        "levels": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/spec"}},
        "links": {"type": "array", "items": MATRIX},
    },
}

PAIR = {
    "type": "object",
    "required": ["vector", "form"],
    "additionalProperties": False,
    "properties": {"vector": FIELD, "form": FIELD},
}

ALGEBROID = {
    "type": "object",
    "required": ["anchor"],
    "additionalProperties": False,
    "properties": {
        "anchor": {"type": "array", "minItems": 1, "items": FIELD},
        "structure": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["a", "b", "components"],
                "additionalProperties": False,
                "properties": {
                    "a": {"type": "integer", "minimum": 1},
                    "b": {"type": "integer", "minimum": 1},
                    "components": {"type": "array", "items": POLY},
                },
            },
        },
    },
}

BRACKET = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["op", "chart", "args"],
    "additionalProperties": False,
    "properties": {
        "op": {"enum": ["lie_bracket", "exterior_derivative", "lie_derivative", "courant_bracket",
                        "dorfman_bracket", "courant_tensor", "jacobiator"]},
        "chart": CHART,
        "algebroid": ALGEBROID,
        "args": {"type": "array", "minItems": 1, "items": {"anyOf": [FIELD, PAIR]}},
    },
}

DIRAC_FIELD = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["BivectorGraph", "TwoFormGraph", "DistributionPlusAnnihilator"]},
        "chart": CHART,
        "dim": {"type": "integer", "minimum": 1},
        "pi": FIELD,
        "omega": FIELD,
        "forms": {"type": "array", "items": FIELD},
        "Q": FIELD,
        "spanning_fields": {"type": "array", "items": FIELD},
        "system": {"enum": ["rolling-disk", "lc-circuit"]},
        "params": {"type": "object", "additionalProperties": {"type": "number"}},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "BivectorGraph"}}}, "then": {"required": ["pi"]}},
        {"if": {"properties": {"kind": {"const": "TwoFormGraph"}}}, "then": {"required": ["omega"]}},
        {"anyOf": [{"required": ["chart"]}, {"required": ["dim"]}, {"required": ["system"]}]},
    ],
}

SYSTEM = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["name", "h", "T"],
    "additionalProperties": False,
    "properties": {
        "name": {"enum": ["rolling-disk", "lc-circuit", "custom"]},
        "label": {"type": "string"},
        "params": {"type": "object", "additionalProperties": {"type": "number"}},
        "z0": VECTOR,
        "rates": {
            "type": "object",
            "required": ["theta_dot", "phi_dot"],
            "additionalProperties": False,
            "properties": {"theta_dot": {"type": "number"}, "phi_dot": {"type": "number"}},
        },
        "h": {"type": "number", "exclusiveMinimum": 0},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "dim": {"type": "integer", "minimum": 1},
        "angles": {"type": "integer", "minimum": 0},
        "names": {"type": "array", "items": {"type": "string"}},
        "forms": {"type": "array", "items": FIELD},
        "hamiltonian": POLY,
        "check_admissible": {"type": "boolean"},
    },
    "allOf": [
        {"if": {"properties": {"name": {"const": "custom"}}}, "then": {"required": ["dim", "z0"]}},
        {"anyOf": [{"required": ["z0"]}, {"required": ["rates"]}]},
    ],
}

SCHEMAS = {
    "verify": LINEAR,
    "construct": LINEAR,
    "bracket": BRACKET,
    "involutivity": DIRAC_FIELD,
    "simulate": SYSTEM,
    "limits": SEQUENCE,
}
