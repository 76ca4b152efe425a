"""Versioned on-disk persistence for trained models.

Files carry a line of ASCII magic naming the format version, followed by a
pickled payload holding the model, its input dimension, and free-form
metadata (the training configuration echo).
"""

from __future__ import annotations

import pickle
from pathlib import Path

from .learners import RegressionFunction

MAGIC = b"EVOSTACK-MODEL"
FORMAT_VERSION = 1

__all__ = ["MAGIC", "FORMAT_VERSION", "ModelFormatError", "save_model", "load_model"]


class ModelFormatError(RuntimeError):
    """File is not a model file or has an unsupported format version."""


def save_model(path, model: RegressionFunction, metadata: dict | None = None) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "n_features": model.n_features,
        "metadata": dict(metadata or {}),
        "model": model,
    }
    with Path(path).open("wb") as fh:
        fh.write(f"{MAGIC.decode('ascii')} v{FORMAT_VERSION}\n".encode("ascii"))
        pickle.dump(payload, fh, protocol=4)


def load_model(path) -> tuple[RegressionFunction, dict]:
    path = Path(path)
    if not path.exists():
        raise ModelFormatError(f"no such model file: {path}")
    with path.open("rb") as fh:
        line = fh.readline()
        if not line.startswith(MAGIC + b" v"):
            raise ModelFormatError(f"{path}: not a model file (bad magic header)")
        try:
            version = int(line[len(MAGIC) + 2:].strip())
        except ValueError:
            raise ModelFormatError(f"{path}: unreadable format version") from None
        if version != FORMAT_VERSION:
            raise ModelFormatError(
                f"{path}: format version {version} unsupported (expected {FORMAT_VERSION})")
        payload = pickle.load(fh)
    return payload["model"], payload["metadata"]
