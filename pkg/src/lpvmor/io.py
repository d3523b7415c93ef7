"""Model files.

A model file is a JSON object::

    {
      "format": "lpv-ss",            # optional tag
      "n_x": 2, "n_u": 1, "n_y": 1, "n_p": 1,
      "A": [A_0, A_1, ...],          # n_p+1 matrices, each a list of rows
      "B": [B_0, B_1, ...],
      "C": [C_0, C_1, ...],
      "meta": {...}                  # optional, free-form
    }

Index 0 of ``A``/``B``/``C`` is the constant term.  Unknown top-level keys
are rejected.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import LpvSsModel, ModelValidationError, validate_model

FORMAT_TAG = "lpv-ss"
REQUIRED = ("n_x", "n_u", "n_y", "n_p", "A", "B", "C")
OPTIONAL = ("format", "meta")


def model_from_dict(data) -> LpvSsModel:
    if not isinstance(data, dict):
        raise ModelValidationError(["model document must be a JSON object"])
    problems = []
    unknown = sorted(set(data) - set(REQUIRED) - set(OPTIONAL))
    if unknown:
        problems.append(f"unknown field(s): {', '.join(unknown)}")
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        problems.append(f"missing field(s): {', '.join(missing)}")
    if data.get("format", FORMAT_TAG) != FORMAT_TAG:
        problems.append(f"format: expected {FORMAT_TAG!r}, got {data['format']!r}")
    if problems:
        raise ModelValidationError(problems)
    return validate_model(data)


def model_to_dict(model: LpvSsModel, meta: dict | None = None) -> dict:
    doc = {"format": FORMAT_TAG, **model.to_dict()}
    if meta:
        doc["meta"] = meta
    return doc


def dumps_model(model: LpvSsModel, meta: dict | None = None) -> str:
    # repr-exact floats so a round trip is lossless
    return json.dumps(model_to_dict(model, meta), indent=1) + "\n"


def loads_model(text: str) -> LpvSsModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelValidationError([f"not valid JSON: {exc}"]) from None
    return model_from_dict(data)


def load_model(path) -> LpvSsModel:
    return loads_model(Path(path).read_text())


def save_model(model: LpvSsModel, path, meta: dict | None = None) -> None:
    Path(path).write_text(dumps_model(model, meta))


def format_matrix(M: np.ndarray) -> str:
    """Plain whitespace-separated text, one row per line."""
    M = np.atleast_2d(M)
    return "\n".join(" ".join(f"{v:.17g}" for v in row) for row in M)
