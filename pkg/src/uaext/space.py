"""Finite models of compact spaces, continuous surjections, and measures.

A FiniteSpace is a labelled list of points in C^k.  Surjections carry a
per-point assignment into the target with precomputed fibers, and measures
are complex weight vectors.  Everything is immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ValidationError

MERGE_TOL = 1e-8
SUPPORT_TOL = 1e-12


def _freeze(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FiniteSpace:
    labels: tuple
    coords: np.ndarray  # (n_points, arity) complex

    def __post_init__(self):
        if len(self.labels) == 0:
            raise InputError("a space needs at least one point")
        if len(set(self.labels)) != len(self.labels):
            raise InputError("duplicate point labels")
        c = np.asarray(self.coords, dtype=complex)
        if c.ndim != 2 or c.shape[0] != len(self.labels):
            raise InputError("coords must be (n_points, arity)")
        object.__setattr__(self, "coords", _freeze(c))
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def arity(self) -> int:
        return self.coords.shape[1]

    def index_of(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError("unknown point label %r" % (label,)) from None


def _coord_key(row):
    return tuple(v for z in row for v in (z.real, z.imag))


def make_space(raw_points, merge_tol: float = MERGE_TOL) -> FiniteSpace:
    """Build a FiniteSpace from raw coordinate tuples.

    Points within merge_tol (Euclidean over stacked real/imag parts) are
    merged; labels are regenerated from the coordinate sort order, so the
    same cloud of points always produces the same space.
    """
    pts = [np.atleast_1d(np.asarray(p, dtype=complex)) for p in raw_points]
    if not pts:
        raise InputError("empty point list")
    arity = pts[0].size
    if any(p.size != arity for p in pts):
        raise InputError("points have mixed coordinate arity")
    order = sorted(range(len(pts)), key=lambda i: _coord_key(pts[i]))
    kept = []
    for i in order:
        p = pts[i]
        merged = False
        for q in kept:
            if np.linalg.norm(np.concatenate([(p - q).real, (p - q).imag])) <= merge_tol:
                merged = True
                break
        if not merged:
            kept.append(p)
    width = max(3, len(str(len(kept) - 1)))
    labels = ["p%0*d" % (width, i) for i in range(len(kept))]
    return FiniteSpace(labels=tuple(labels), coords=np.array(kept))


@dataclass(frozen=True)
class SurjectionMap:
    source: FiniteSpace
    target: FiniteSpace
    assignment: np.ndarray  # per source point, index into target
    fibers: tuple = field(default=None)  # filled in __post_init__

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=int)
        if a.size != self.source.size:
            raise InputError("assignment length %d != source size %d"
                             % (a.size, self.source.size))
        if a.size and (a.min() < 0 or a.max() >= self.target.size):
            raise InputError("assignment index out of range")
        fibers = [[] for _ in range(self.target.size)]
        for y, x in enumerate(a):
            fibers[x].append(y)
        for x, f in enumerate(fibers):
            if not f:
                raise ValidationError("map is not surjective: target point %r is never hit"
                                      % (self.target.labels[x],))
        object.__setattr__(self, "assignment", _freeze(a))
        object.__setattr__(self, "fibers", tuple(tuple(f) for f in fibers))


def make_surjection(source: FiniteSpace, target: FiniteSpace, assignment) -> SurjectionMap:
    return SurjectionMap(source=source, target=target,
                         assignment=np.asarray(assignment, dtype=int))


def fiber(mapping: SurjectionMap, x) -> tuple:
    """Source point indices over target point x (index or label)."""
    if isinstance(x, str):
        x = mapping.target.index_of(x)
    if not 0 <= x < mapping.target.size:
        raise InputError("unknown target point %r" % (x,))
    return mapping.fibers[x]


@dataclass(frozen=True)
class Measure:
    space: FiniteSpace
    weights: np.ndarray  # complex, one per point

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.shape != (self.space.size,):
            raise InputError("weights length %d != point count %d"
                             % (w.size, self.space.size))
        object.__setattr__(self, "weights", _freeze(w))

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    def support(self, support_tol: float = SUPPORT_TOL) -> tuple:
        return tuple(int(i) for i in np.nonzero(np.abs(self.weights) > support_tol)[0])

    def is_probability(self, support_tol: float = SUPPORT_TOL) -> bool:
        w = self.weights
        if np.abs(w.imag).max(initial=0.0) > support_tol:
            return False
        if w.real.min(initial=0.0) < -support_tol:
            return False
        return abs(w.real.sum() - 1.0) <= 1e-10

    def integrate(self, values) -> complex:
        return complex(np.dot(self.weights, np.asarray(values)))


def point_mass(space: FiniteSpace, index: int) -> Measure:
    w = np.zeros(space.size, dtype=complex)
    w[index] = 1.0
    return Measure(space=space, weights=w)


def pushforward_measure(mapping: SurjectionMap, mu: Measure) -> Measure:
    """Sum the weights over each fiber.  For any table f on the target,
    integrating f against the result equals integrating f∘Π against mu,
    exactly (finite sums)."""
    if mu.space is not mapping.source and mu.space.labels != mapping.source.labels:
        raise InputError("measure lives on a different space than the map's source")
    w = np.zeros(mapping.target.size, dtype=complex)
    np.add.at(w, mapping.assignment, mu.weights)
    return Measure(space=mapping.target, weights=w)
