"""File helpers: model loading and atomic JSON / CSV output."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, cast

from .const import LOGGER_NAME
from .core import ConfigError, PairwiseModel

_LOGGER = logging.getLogger(LOGGER_NAME)


def format_json_bytes(payload: Any) -> bytes:
    """Stable, pretty JSON encoding."""
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def write_bytes_atomic(path: Path, data: bytes) -> Path:
    """Write `data` to a temporary file next to `path`, then rename it into place.

    Returns:
        `path`.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    _LOGGER.debug("Wrote %s (%d bytes)", path, len(data))
    return path


def write_json_atomic(path: Path, payload: Any) -> Path:
    """Atomically write `payload` as JSON."""
    return write_bytes_atomic(path, format_json_bytes(payload))


def write_csv_atomic(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]
) -> Path:
    """Atomically write a header plus rows as CSV with `\\n` line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return write_bytes_atomic(path, buf.getvalue().encode("utf-8"))


def load_json_object(path: Path) -> dict[str, Any]:
    """Read a JSON file whose top level must be an object.

    Raises:
        OSError: The file cannot be read.
        ConfigError: The file is not valid JSON or its top level is not an
            object.
    """
    try:
        payload: Any = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON: {err}") from err
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: expected a JSON object at the top level")
    return cast(dict[str, Any], payload)


def load_model(path: Path) -> PairwiseModel:
    """Read and validate a model file."""
    model = PairwiseModel.from_json_dict(load_json_object(path))
    _LOGGER.debug(
        "Loaded %s: n=%d d=%d |E|=%d",
        path,
        model.n,
        model.d,
        model.topology.num_edges,
    )
    return model
