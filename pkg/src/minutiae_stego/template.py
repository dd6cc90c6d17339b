"""Minutiae template data model and its text/binary file formats.

Text format (``.mnt``)::

    index,x,y,theta
    1,43,152,236
    2,43,185,236

UTF-8, LF line endings, 1-based contiguous indices, rows sorted by ``x``
(ties kept in stored order).

Binary format (``.mntb``): magic ``MNT1``, a big-endian uint16 count, then
``count`` records of three big-endian uint16 values ``(x, y, theta)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Tuple

TEXT_HEADER = "index,x,y,theta"
BINARY_MAGIC = b"MNT1"
COORD_MAX = 0xFFFF
THETA_LIMIT = 360

_COUNT = struct.Struct(">H")
_RECORD = struct.Struct(">HHH")


class TemplateError(ValueError):
    """Base class for template validation and format errors."""


class TemplateParseError(TemplateError):
    pass


class TemplateOrderError(TemplateError):
    pass


class TemplateRangeError(TemplateError):
    pass


@dataclass(frozen=True)
class MinutiaPoint:
    x: int
    y: int
    theta: int

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.x, self.y, self.theta)


def _check_point(p: MinutiaPoint, where: str) -> None:
    for name in ("x", "y", "theta"):
        v = getattr(p, name)
        if not isinstance(v, int) or isinstance(v, bool):
            raise TemplateRangeError(f"{where}: {name} must be an integer, got {v!r}")
    if not (0 <= p.x <= COORD_MAX and 0 <= p.y <= COORD_MAX):
        raise TemplateRangeError(f"{where}: coordinates ({p.x}, {p.y}) outside [0, {COORD_MAX}]")
    if not 0 <= p.theta < THETA_LIMIT:
        raise TemplateRangeError(f"{where}: theta {p.theta} outside [0, {THETA_LIMIT - 1}]")


@dataclass(frozen=True)
class MinutiaeTemplate:
    """Immutable, x-sorted sequence of minutiae.

    Construction validates every point and the non-decreasing x order, so any
    instance that exists is serializable.
    """

    points: Tuple[MinutiaPoint, ...] = ()

    def __post_init__(self) -> None:
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        prev_x = None
        for i, p in enumerate(pts, start=1):
            _check_point(p, f"minutia {i}")
            if prev_x is not None and p.x < prev_x:
                raise TemplateOrderError(
                    f"minutia {i}: x={p.x} is smaller than previous x={prev_x}"
                )
            prev_x = p.x

    @classmethod
    def from_tuples(cls, rows: Iterable[Sequence[int]]) -> "MinutiaeTemplate":
        return cls(tuple(MinutiaPoint(int(x), int(y), int(t)) for x, y, t in rows))

    @classmethod
    def unordered(cls, points: Iterable[MinutiaPoint]) -> "MinutiaeTemplate":
        """Build a template whose x order may be broken (embedding without
        order preservation).  Points are still range-checked; serializers
        refuse the result unless it happens to be sorted."""
        pts = tuple(points)
        for i, p in enumerate(pts, start=1):
            _check_point(p, f"minutia {i}")
        t = object.__new__(cls)
        object.__setattr__(t, "points", pts)
        return t

    def is_sorted(self) -> bool:
        xs = [p.x for p in self.points]
        return all(a <= b for a, b in zip(xs, xs[1:]))

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[MinutiaPoint]:
        return iter(self.points)

    def fields(self) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]:
        """Return the ``(xs, ys, thetas)`` columns."""
        return (
            tuple(p.x for p in self.points),
            tuple(p.y for p in self.points),
            tuple(p.theta for p in self.points),
        )


def parse_text(text: str) -> MinutiaeTemplate:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TemplateParseError("line 1: missing header")
    if lines[0].strip() != TEXT_HEADER:
        raise TemplateParseError(f"line 1: expected header {TEXT_HEADER!r}, got {lines[0]!r}")

    points = []
    prev_x = None
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.strip().split(",")
        if len(parts) != 4:
            raise TemplateParseError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            idx, x, y, theta = (int(v) for v in parts)
        except ValueError:
            raise TemplateParseError(f"line {lineno}: non-integer field in {line!r}") from None
        if idx != lineno - 1:
            raise TemplateParseError(f"line {lineno}: expected index {lineno - 1}, got {idx}")
        p = MinutiaPoint(x, y, theta)
        _check_point(p, f"line {lineno}")
        if prev_x is not None and x < prev_x:
            raise TemplateOrderError(f"line {lineno}: x={x} is smaller than previous x={prev_x}")
        prev_x = x
        points.append(p)
    return MinutiaeTemplate(tuple(points))


def serialize_text(t: MinutiaeTemplate) -> str:
    # re-validate: unordered() instances must not reach disk
    MinutiaeTemplate(t.points)
    out = [TEXT_HEADER]
    for i, p in enumerate(t.points, start=1):
        out.append(f"{i},{p.x},{p.y},{p.theta}")
    return "\n".join(out) + "\n"


def serialize_binary(t: MinutiaeTemplate) -> bytes:
    MinutiaeTemplate(t.points)
    if t.n > COORD_MAX:
        raise TemplateRangeError(f"too many minutiae for binary format: {t.n}")
    chunks = [BINARY_MAGIC, _COUNT.pack(t.n)]
    chunks.extend(_RECORD.pack(p.x, p.y, p.theta) for p in t.points)
    return b"".join(chunks)


def parse_binary(data: bytes) -> MinutiaeTemplate:
    if len(data) < 4 or data[:4] != BINARY_MAGIC:
        raise TemplateParseError("bad magic: not a MNT1 binary template")
    if len(data) < 6:
        raise TemplateParseError("truncated stream: missing count")
    (count,) = _COUNT.unpack_from(data, 4)
    expected = 6 + count * _RECORD.size
    if len(data) < expected:
        raise TemplateParseError(
            f"truncated stream: count {count} needs {expected} bytes, got {len(data)}"
        )
    if len(data) > expected:
        raise TemplateParseError(
            f"count mismatch: count {count} implies {expected} bytes, got {len(data)}"
        )
    points = [MinutiaPoint(*_RECORD.unpack_from(data, 6 + i * _RECORD.size)) for i in range(count)]
    return MinutiaeTemplate(tuple(points))


def load(path, fmt: str | None = None) -> MinutiaeTemplate:
    """Read a template file; format inferred from the extension unless given."""
    fmt = fmt or infer_format(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    if fmt == "binary":
        return parse_binary(raw)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TemplateParseError(f"not UTF-8 text: {exc}") from None
    return parse_text(text)


def dump(t: MinutiaeTemplate, path, fmt: str | None = None) -> None:
    fmt = fmt or infer_format(path)
    payload = serialize_binary(t) if fmt == "binary" else serialize_text(t).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(payload)


def infer_format(path) -> str:
    return "binary" if str(path).endswith(".mntb") else "text"
