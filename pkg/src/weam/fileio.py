"""Atomic file writes shared by every on-disk format.

Writers in this package never leave partial output behind: content is
written to a temporary file in the destination directory and renamed into
place only once fully flushed.
"""

from __future__ import annotations

import os
import tempfile


def atomic_write(path, data: bytes) -> int:
    """Write ``data`` to ``path`` atomically, returning the byte count."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return len(data)


def atomic_write_text(path, text: str) -> int:
    return atomic_write(path, text.encode("utf-8"))
