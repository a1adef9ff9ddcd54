"""Self-describing .npz checkpoints: every named parameter plus a JSON meta entry."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from ..core.exceptions import CheckpointError
from .params import ParameterStore

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
META_KEY = "__meta__"


def save_checkpoint(path: Path | str, store: ParameterStore, meta: Optional[dict] = None) -> Path:
    """
    Write all parameters bit-exactly.

    The meta entry always carries the format version and the parameter shapes;
    callers add the experiment config and training progress.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = dict(meta or {})
    header["version"] = CHECKPOINT_VERSION
    header["shapes"] = {name: list(value.shape) for name, value in store.items()}

    arrays = {name: value for name, value in store.items()}
    arrays[META_KEY] = np.array(json.dumps(header, sort_keys=True))
    with path.open("wb") as handle:
        np.savez(handle, **arrays)
    logger.info(f"Saved checkpoint to {path}")
    return path


def read_checkpoint(path: Path | str) -> tuple[dict[str, np.ndarray], dict]:
    """
    Read parameter arrays and meta without binding them to a network.

    Raises:
        CheckpointError: If the file is missing, unreadable or has the wrong version
    """
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            arrays = {name: data[name] for name in data.files}
    except FileNotFoundError:
        raise CheckpointError(str(path), "file not found")
    except (OSError, ValueError) as e:
        raise CheckpointError(str(path), f"unreadable: {e}") from e

    if META_KEY not in arrays:
        raise CheckpointError(str(path), "missing meta entry")
    meta = json.loads(str(arrays.pop(META_KEY)))
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(str(path), f"unsupported version {meta.get('version')}")
    return arrays, meta


def load_checkpoint(path: Path | str, store: ParameterStore) -> dict:
    """
    Load parameters into an existing store and return the meta entry.

    Raises:
        CheckpointError: If names or shapes do not match the store
    """
    arrays, meta = read_checkpoint(path)
    expected = {name: value.shape for name, value in store.items()}
    found = {name: value.shape for name, value in arrays.items()}
    if expected != found:
        raise CheckpointError(str(path), "parameter names or shapes do not match the network")
    store.load(arrays)
    logger.info(f"Loaded checkpoint from {path}")
    return meta
