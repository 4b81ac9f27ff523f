"""Tag stream file formats.

CSV: header ``channel,t_ps``, one base-10 integer pair per line.
BIN: 8-byte magic ``SPTT0001`` followed by packed 9-byte records,
1 byte channel + 8 bytes unsigned little-endian picosecond timestamp.
"""

from __future__ import annotations

import warnings
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import TagStream
from .errors import OrderingError, ParseError

MAGIC = b"SPTT0001"
CSV_HEADER = "channel,t_ps"

_BIN_DTYPE = np.dtype([("channel", "u1"), ("t_ps", "<u8")])

PathLike = Union[str, Path]


def _build_stream(channel: np.ndarray, t_ps: np.ndarray, path: PathLike,
                  duration_ps: Optional[int]) -> TagStream:
    if duration_ps is None:
        duration_ps = int(t_ps[-1]) if t_ps.size else 0
    try:
        return TagStream(channel=channel, t_ps=t_ps, duration_ps=duration_ps)
    except OrderingError:
        dt = np.diff(t_ps.astype(np.int64))
        bad = int(np.argmax(dt < 0)) + 1 if dt.size and dt.min() < 0 else 0
        raise OrderingError(
            f"{path}: non-monotone timestamp at record {bad} (line {bad + 2} in CSV terms)"
        ) from None


def read_tags_csv(path: PathLike, duration_ps: Optional[int] = None) -> TagStream:
    """Read a CSV tag file, reporting the offending line on failure."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ParseError(f"{path}: line 1: expected header {CSV_HEADER!r}, got {header!r}")
        try:
            with warnings.catch_warnings():
                warnings.filterwarnings("ignore", message=".*no data.*")
                data = np.loadtxt(fh, delimiter=",", dtype=np.int64, ndmin=2)
        except ValueError:
            fh.seek(0)
            fh.readline()
            for lineno, line in enumerate(fh, start=2):
                parts = line.strip().split(",")
                if len(parts) != 2 or not all(p.strip().lstrip("-").isdigit() for p in parts):
                    raise ParseError(f"{path}: line {lineno}: malformed record {line.strip()!r}") from None
            raise ParseError(f"{path}: malformed CSV") from None
    if data.size == 0:
        return _build_stream(np.empty(0, np.uint8), np.empty(0, np.int64), path, duration_ps)
    channel, t_ps = data[:, 0], data[:, 1]
    if channel.min() < 0 or channel.max() > 255:
        bad = int(np.argmax((channel < 0) | (channel > 255)))
        raise ParseError(f"{path}: line {bad + 2}: channel out of range")
    return _build_stream(channel.astype(np.uint8), t_ps, path, duration_ps)


def write_tags_csv(stream: TagStream, path: PathLike) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(CSV_HEADER + "\n")
        for c, t in zip(stream.channel, stream.t_ps):
            fh.write(f"{c},{t}\n")


def read_tags_bin(path: PathLike, duration_ps: Optional[int] = None) -> TagStream:
    """Read a BIN tag file, reporting the offending byte offset on failure."""
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) or raw[: len(MAGIC)] != MAGIC:
        raise ParseError(f"{path}: byte 0: bad magic, expected {MAGIC!r}")
    body = raw[len(MAGIC):]
    if len(body) % _BIN_DTYPE.itemsize:
        raise ParseError(
            f"{path}: byte {len(raw)}: truncated record "
            f"({len(body) % _BIN_DTYPE.itemsize} trailing bytes)"
        )
    records = np.frombuffer(body, dtype=_BIN_DTYPE)
    t_ps = records["t_ps"]
    if t_ps.size and t_ps.max() > np.iinfo(np.int64).max:
        raise ParseError(f"{path}: timestamp exceeds signed 64-bit range")
    return _build_stream(records["channel"].copy(), t_ps.astype(np.int64), path, duration_ps)


def write_tags_bin(stream: TagStream, path: PathLike) -> None:
    records = np.empty(len(stream), dtype=_BIN_DTYPE)
    records["channel"] = stream.channel
    records["t_ps"] = stream.t_ps.astype(np.uint64)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(records.tobytes())


def parse_tags(path: PathLike, fmt: str, duration_ps: Optional[int] = None) -> TagStream:
    """Dispatch on ``fmt`` in {"csv", "bin"}."""
    if fmt == "csv":
        return read_tags_csv(path, duration_ps)
    if fmt == "bin":
        return read_tags_bin(path, duration_ps)
    raise ParseError(f"unknown tag format {fmt!r}")


def write_tags(stream: TagStream, path: PathLike, fmt: str) -> None:
    if fmt == "csv":
        write_tags_csv(stream, path)
    elif fmt == "bin":
        write_tags_bin(stream, path)
    else:
        raise ParseError(f"unknown tag format {fmt!r}")


def sniff_format(path: PathLike) -> str:
    """Guess csv/bin from the leading bytes."""
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    return "bin" if head == MAGIC else "csv"
