"""Composite learner descriptions as JSON files referencing registry names.

Three kinds are supported:

  {"kind": "single",   "learner": "<registry name>"}
  {"kind": "bagging",  "base": "<registry name>", "t": 20}
  {"kind": "stacking", "folds": 4, "level2": "<registry name>",
   "ensemble": ["<registry name>", ...]}

An optional "name" overrides the derived display name. A hand-tuned stacking
ensemble ships with the package as an example spec file.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .data import DataError
from .ensembles import BaggingSpec, StackingSpec
from .evolve import Registry
from .learners import LearnerSpec

__all__ = ["load_spec_file", "spec_from_dict", "resolve_spec",
           "bundled_hand_tuned_path"]


def bundled_hand_tuned_path() -> Path:
    """Path of the bundled hand-tuned stacking spec file."""
    return Path(str(resources.files("evostack").joinpath("assets/hand_tuned.json")))


def spec_from_dict(doc: dict, registry: Registry, where: str = "spec") -> LearnerSpec:
    if not isinstance(doc, dict):
        raise DataError(f"{where}: expected a JSON object, got {type(doc).__name__}")
    kind = doc.get("kind")
    name = doc.get("name", "")

    def lookup(key: str, value) -> LearnerSpec:
        if not isinstance(value, str):
            raise DataError(f"{where}: '{key}' must be a registry name string")
        try:
            return registry.by_name(value)
        except ValueError as exc:
            raise DataError(f"{where}: {exc}") from None

    if kind == "single":
        return lookup("learner", doc.get("learner"))
    if kind == "bagging":
        t = doc.get("t")
        if not isinstance(t, int) or t < 1:
            raise DataError(f"{where}: 't' must be a positive integer, got {t!r}")
        return BaggingSpec(base=lookup("base", doc.get("base")), t=t, name=name)
    if kind == "stacking":
        folds = doc.get("folds")
        if not isinstance(folds, int) or not 2 <= folds <= 6:
            raise DataError(f"{where}: 'folds' must be an integer in [2, 6], got {folds!r}")
        ensemble = doc.get("ensemble")
        if not isinstance(ensemble, list) or not ensemble:
            raise DataError(f"{where}: 'ensemble' must be a non-empty list of registry names")
        members = tuple(lookup("ensemble", m) for m in ensemble)
        return StackingSpec(ensemble=members, l2=lookup("level2", doc.get("level2")),
                            folds=folds, name=name)
    raise DataError(
        f"{where}: unknown kind {kind!r} (expected 'single', 'bagging' or 'stacking')")


def load_spec_file(path, registry: Registry) -> LearnerSpec:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such spec file: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from None
    return spec_from_dict(doc, registry, where=str(path))


def resolve_spec(selector: str, registry: Registry) -> LearnerSpec:
    """Resolve a CLI learner selector: spec-file path, 1-based index, or name."""
    path = Path(selector)
    if path.exists():
        return load_spec_file(path, registry)
    if selector.endswith(".json"):
        raise DataError(f"no such spec file: {selector}")
    if selector.isdigit():
        try:
            return registry.spec_at(int(selector))
        except ValueError as exc:
            raise DataError(str(exc)) from None
    try:
        return registry.by_name(selector)
    except ValueError as exc:
        raise DataError(str(exc)) from None
