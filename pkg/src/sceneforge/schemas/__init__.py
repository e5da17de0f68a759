"""Bundled JSON Schemas and validation helpers."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

__all__ = ["load_schema", "wire_validator", "validate_record", "validate_report"]


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files(__package__).joinpath(name).read_text(encoding="utf-8")
    return json.loads(text)


@lru_cache(maxsize=None)
def wire_validator(kind: str, side: str) -> jsonschema.Draft202012Validator:
    """Validator for a request/response body, e.g. wire_validator("depth", "request")."""
    wire = load_schema("wire.schema.json")
    schema = {"$ref": f"#/$defs/{kind}_{side}", "$defs": wire["$defs"]}
    return jsonschema.Draft202012Validator(schema)


def validate_record(obj: dict) -> None:
    jsonschema.validate(obj, load_schema("dataset_record.schema.json"))


def validate_report(obj: dict) -> None:
    jsonschema.validate(obj, load_schema("eval_report.schema.json"))
