"""Figure specifications: what to draw, from which tables.

A spec is a JSON object {kind, inputs, out?, style?}.  Relative input and
output paths resolve against the directory holding the spec file, so a spec
can ship next to its data.  Input tables are the CSV files the outpostlab
command line writes; loading checks the required columns up front and
refuses to guess when they are absent.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import pandas as pd


class PlotsError(Exception):
    """Base for all figure-pipeline failures."""


class SchemaMismatch(PlotsError):
    """A table lacks required columns or a spec field is malformed."""


FIGURE_KINDS = (
    "ensemble_scatter",
    "droplet_family",
    "berezin_mass_curve",
    "density_profile",
    "heine_histogram",
)


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: dict  # name -> path or list of paths, already resolved
    out: str | None = None
    style: dict = field(default_factory=dict)


def _resolve(path: str, base: str) -> str:
    if os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base, path))


def load_spec(path: str) -> FigureSpec:
    with open(path) as fh:  # missing spec surfaces as FileNotFoundError
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise SchemaMismatch(f"{path}: spec must be a JSON object")
    kind = raw.get("kind")
    if kind not in FIGURE_KINDS:
        raise SchemaMismatch(
            f"{path}: unknown figure kind {kind!r}; "
            f"expected one of {', '.join(FIGURE_KINDS)}"
        )
    inputs = raw.get("inputs")
    if not isinstance(inputs, dict) or not inputs:
        raise SchemaMismatch(f"{path}: 'inputs' must be a non-empty object")
    base = os.path.dirname(os.path.abspath(path))
    resolved: dict = {}
    for name, value in inputs.items():
        if isinstance(value, str):
            resolved[name] = _resolve(value, base)
        elif (
            isinstance(value, list)
            and value
            and all(isinstance(v, str) for v in value)
        ):
            resolved[name] = [_resolve(v, base) for v in value]
        else:
            raise SchemaMismatch(
                f"{path}: input {name!r} must be a path or a list of paths"
            )
    out = raw.get("out")
    if out is not None:
        if not isinstance(out, str):
            raise SchemaMismatch(f"{path}: 'out' must be a path")
        out = _resolve(out, base)
    style = raw.get("style", {})
    if not isinstance(style, dict):
        raise SchemaMismatch(f"{path}: 'style' must be an object")
    return FigureSpec(kind=kind, inputs=resolved, out=out, style=style)


def load_table(path: str, required: tuple[str, ...]) -> pd.DataFrame:
    if not os.path.exists(path):
        raise FileNotFoundError(f"input table not found: {path}")
    df = pd.read_csv(path)
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise SchemaMismatch(
            f"{path}: missing columns {missing}; found {list(df.columns)}"
        )
    return df
