"""Rigid-alignment minutiae matcher.

Every pair of minutiae (one per template) is tried as the reference for a
rigid alignment.  Rather than transforming one template onto the other, each
template is expressed in the local frame of its reference minutia (origin at
the minutia, axis along its direction, coordinates rounded to integers);
under a given reference pair the two local frames coincide exactly when the
rigid transform maps one reference minutia onto the other.  Correspondences
within ``dist_tol`` pixels and ``angle_tol`` degrees are paired greedily by
increasing distance, and the score is ``pairs**2 / (n1 * n2)``.

The alignment search is the hot loop of the evaluation harness.  A compiled
kernel (``_match_ext``) is used when it was built; otherwise the numpy
implementation in ``_match_py`` runs.  Set ``MINUTIAE_STEGO_PURE=1`` to force
the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from . import _match_py
from .template import MinutiaeTemplate

try:
    if os.environ.get("MINUTIAE_STEGO_PURE"):
        raise ImportError("pure-Python backend forced")
    from . import _match_ext
except ImportError:
    _match_ext = None

BACKEND = "cython" if _match_ext is not None else "python"

_KERNELS = {"python": _match_py.best_alignment}
if _match_ext is not None:
    _KERNELS["cython"] = _match_ext.best_alignment


def _trig_tables():
    cos = np.array([math.cos(math.radians(d)) for d in range(360)])
    sin = np.array([math.sin(math.radians(d)) for d in range(360)])
    for d, c, s in ((0, 1.0, 0.0), (90, 0.0, 1.0), (180, -1.0, 0.0), (270, 0.0, -1.0)):
        cos[d], sin[d] = c, s
    return cos, sin


_COS, _SIN = _trig_tables()


@dataclass(frozen=True)
class MatchParams:
    dist_tol: float = 10.0
    angle_tol: float = 20.0
    score_mode: str = "normalized-pair-count"

    def __post_init__(self) -> None:
        if not 0 < self.dist_tol <= 10000:
            raise ValueError(f"dist_tol must be in (0, 10000], got {self.dist_tol}")
        if not 0 < self.angle_tol <= 180:
            raise ValueError(f"angle_tol must be in (0, 180], got {self.angle_tol}")
        if self.score_mode != "normalized-pair-count":
            raise ValueError(f"unsupported score_mode {self.score_mode!r}")


@dataclass(frozen=True)
class MatchResult:
    score: float
    matched_pairs: int
    alignment: Tuple[float, float, int]  # (dx, dy, dtheta) mapping a onto b


class PreparedTemplate:
    """A template together with its local frames, reusable across matches."""

    __slots__ = ("template", "fx", "fy", "ft", "key")

    def __init__(self, template: MinutiaeTemplate):
        self.template = template
        self.key = tuple(p.as_tuple() for p in template.points)
        xs, ys, ts = (np.asarray(c, dtype=np.int64) for c in template.fields())
        dx = (xs[None, :] - xs[:, None]).astype(np.float64)
        dy = (ys[None, :] - ys[:, None]).astype(np.float64)
        c = _COS[ts][:, None]
        s = _SIN[ts][:, None]
        # rotate by -theta_i: round half up so both kernels see the same integers
        self.fx = np.ascontiguousarray(np.floor(dx * c + dy * s + 0.5), dtype=np.int32)
        self.fy = np.ascontiguousarray(np.floor(dy * c - dx * s + 0.5), dtype=np.int32)
        self.ft = np.ascontiguousarray((ts[None, :] - ts[:, None]) % 360, dtype=np.int32)

    def __len__(self) -> int:
        return self.template.n


TemplateLike = Union[MinutiaeTemplate, PreparedTemplate]


def prepare(t: TemplateLike) -> PreparedTemplate:
    return t if isinstance(t, PreparedTemplate) else PreparedTemplate(t)


def angle_diff(a: float, b: float) -> float:
    """Circular difference between two directions, in [0, 180]."""
    d = abs(a - b) % 360
    return min(d, 360 - d)


def _alignment(a: MinutiaeTemplate, b: MinutiaeTemplate, i: int, j: int):
    pa, pb = a.points[i], b.points[j]
    dtheta = (pb.theta - pa.theta) % 360
    c, s = _COS[dtheta], _SIN[dtheta]
    dx = pb.x - (c * pa.x - s * pa.y)
    dy = pb.y - (s * pa.x + c * pa.y)
    return float(dx), float(dy), int(dtheta)


def _invert(alignment):
    dx, dy, dtheta = alignment
    back = (-dtheta) % 360
    c, s = _COS[back], _SIN[back]
    return float(-(c * dx - s * dy)), float(-(s * dx + c * dy)), int(back)


def match_templates(
    a: TemplateLike,
    b: TemplateLike,
    params: MatchParams = MatchParams(),
    backend: str | None = None,
) -> MatchResult:
    """Score the similarity of two templates in [0, 1].

    The search always runs with the lexicographically smaller template first,
    so ``match(a, b)`` and ``match(b, a)`` share one computation and the score
    is exactly symmetric; the reported alignment is inverted as needed.
    """
    pa, pb = prepare(a), prepare(b)
    n1, n2 = len(pa), len(pb)
    if n1 == 0 or n2 == 0:
        return MatchResult(0.0, 0, (0.0, 0.0, 0))

    swapped = pb.key < pa.key
    first, second = (pb, pa) if swapped else (pa, pb)
    kernel = _KERNELS[backend or BACKEND]
    pairs, i, j = kernel(
        first.fx, first.fy, first.ft,
        second.fx, second.fy, second.ft,
        float(params.dist_tol), float(params.angle_tol),
    )
    alignment = _alignment(first.template, second.template, i, j)
    if swapped:
        alignment = _invert(alignment)
    return MatchResult(pairs * pairs / (n1 * n2), int(pairs), alignment)
