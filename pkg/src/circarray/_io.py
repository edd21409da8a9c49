"""Deterministic, atomic file output."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

SIG_DIGITS = 9


def _file_mode() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return 0o666 & ~mask


def fmt(x: float) -> str:
    s = format(float(x), f".{SIG_DIGITS}g")
    return "0" if s == "-0" else s


def rounded(x: float) -> float:
    return float(fmt(x))


def atomic_write(path, text: str) -> Path:
    """Write ``text`` next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, _file_mode())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(obj, indent=1) + "\n")
