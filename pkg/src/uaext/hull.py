"""Convex hull membership in the complex plane.

Hulls of fiber value sets are tiny (a handful of points) but frequently
degenerate: two distinct values give a segment, one gives a point.  The
distance-to-hull function is therefore the primitive; membership is
distance below a tolerance.
"""

from __future__ import annotations

import numpy as np


def _orient(o, a, b) -> float:
    """Twice the signed area of the triangle (o, a, b)."""
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def convex_hull(points) -> list:
    """Andrew's monotone chain on complex points; counterclockwise order.

    Collinear input collapses to the two extreme points; a single point
    (possibly repeated) collapses to itself.
    """
    pts = sorted(set((complex(p).real, complex(p).imag) for p in points))
    pts = [complex(x, y) for x, y in pts]
    if len(pts) <= 1:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:  # all points collinear and equal after dedup
        return pts[:1]
    return hull


def _segment_distance(p, a, b) -> float:
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0.0:
        return abs(p - a)
    t = ((p - a).real * ab.real + (p - a).imag * ab.imag) / denom
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


def hull_distance(point, points) -> float:
    """Euclidean distance from point to the convex hull of points (0 inside)."""
    p = complex(point)
    hull = convex_hull(points)
    if not hull:
        return float("inf")
    if len(hull) == 1:
        return abs(p - hull[0])
    if len(hull) == 2:
        return _segment_distance(p, hull[0], hull[1])
    inside = True
    for i in range(len(hull)):
        if _orient(hull[i], hull[(i + 1) % len(hull)], p) < 0:
            inside = False
            break
    if inside:
        return 0.0
    return min(_segment_distance(p, hull[i], hull[(i + 1) % len(hull)])
               for i in range(len(hull)))


def in_hull(point, points, tol: float = 1e-9) -> bool:
    return hull_distance(point, points) <= tol
