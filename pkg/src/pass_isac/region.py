"""Downward-closed convex rate regions built from rectangle corners."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core_model import DomainError, RatePair

Point = tuple[float, float]


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class RateRegion:
    """Convex hull of the rectangles [0, cr] x [0, sr] spanned by ``anchors``.

    ``vertices`` run along the upper-right boundary from (CR_max, 0) to
    (0, SR_max); the axes close the region. ``anchors`` keeps the generating
    corners in their original order so regions can be averaged anchor-wise.
    """

    vertices: tuple[Point, ...]
    anchors: tuple[Point, ...]

    @property
    def cr_max(self) -> float:
        return self.vertices[0][0]

    @property
    def sr_max(self) -> float:
        return self.vertices[-1][1]

    def to_csv(self, label: str | None = None) -> str:
        buf = io.StringIO()
        if label is None:
            buf.write("cr,sr\n")
            for cr, sr in self.vertices:
                buf.write(f"{cr!r},{sr!r}\n")
        else:
            for cr, sr in self.vertices:
                buf.write(f"{label},{cr!r},{sr!r}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps([list(v) for v in self.vertices])


def _as_points(corners: Iterable[RatePair | Sequence[float]]) -> list[Point]:
    pts = []
    for c in corners:
        cr, sr = c.as_tuple() if isinstance(c, RatePair) else (float(c[0]), float(c[1]))
        if not (math.isfinite(cr) and math.isfinite(sr)) or cr < 0 or sr < 0:
            raise DomainError(f"corner ({cr}, {sr}) must be finite and nonnegative")
        pts.append((cr, sr))
    return pts


def hull_of_rectangles(corners: Iterable[RatePair | Sequence[float]]) -> RateRegion:
    """Convex hull of {(0,0)} and every rectangle [0,c] x [0,s], by monotone chain."""
    anchors = _as_points(corners)
    if not anchors:
        raise DomainError("hull of an empty corner set")
    c_max = max(p[0] for p in anchors)
    s_max = max(p[1] for p in anchors)
    if c_max == 0.0 and s_max == 0.0:
        return RateRegion(((0.0, 0.0),), tuple(anchors))

    # collinearity slack as a distance, relative to the bounding-box diagonal
    tol = 1e-12 * math.hypot(c_max, s_max)
    # left to right; at equal CR the higher SR comes first
    pts = sorted(set(anchors) | {(c_max, 0.0), (0.0, s_max)}, key=lambda p: (p[0], -p[1]))
    pts = [p for p in pts if p[0] > 0.0 or p == (0.0, s_max)]

    upper: list[Point] = []
    for p in pts:
        # pop on left turns and (near-)collinear points
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) >= -tol * math.dist(upper[-2], p):
            upper.pop()
        upper.append(p)
    upper.reverse()
    verts = [upper[0]]
    for v in upper[1:]:
        if v != verts[-1]:
            verts.append(v)
    return RateRegion(tuple(verts), tuple(anchors))


def contains(region: RateRegion, p: RatePair | Sequence[float], tol: float = 0.0) -> bool:
    """True iff ``p`` lies in the downward-closed region, with slack ``tol`` in rate units."""
    cr, sr = p.as_tuple() if isinstance(p, RatePair) else (float(p[0]), float(p[1]))
    if cr > region.cr_max + tol or sr > region.sr_max + tol:
        return False
    v = region.vertices
    for a, b in zip(v[:-1], v[1:]):
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        if length == 0.0:
            continue
        # boundary runs counter-clockwise, interior on the left
        if _cross(a, b, (cr, sr)) / length < -tol:
            return False
    return True


def region_subset(a: RateRegion, b: RateRegion, tol: float = 0.0) -> bool:
    return all(contains(b, v, tol) for v in a.vertices)


def average_regions(regions: Sequence[RateRegion], alpha_anchor_count: int) -> RateRegion:
    """Average the k-th anchor across realizations, then hull the averaged anchors."""
    if not regions:
        raise DomainError("no regions to average")
    for r in regions:
        if len(r.anchors) != alpha_anchor_count:
            raise DomainError(
                f"region has {len(r.anchors)} anchors, expected {alpha_anchor_count}"
            )
    stacked = np.array([r.anchors for r in regions], dtype=float)
    mean = stacked.mean(axis=0)
    return hull_of_rectangles([(float(c), float(s)) for c, s in mean])
