"""Core relational data types: distance matrices, measures, plans, embeddings.

All types are validated on construction and immutable afterwards, so they can
be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    AsymmetryError,
    EmptyViewsError,
    LengthMismatchError,
    NegativeEntryError,
    NonFiniteInputError,
    NonSquareError,
    NonzeroDiagonalError,
    ShapeMismatchError,
    ZeroSizeError,
)

# Tolerances shared by the validating constructors.
SYMMETRY_TOL = 1e-9
DIAGONAL_TOL = 1e-9
MASS_TOL = 1e-9
MARGINAL_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative pairwise distance matrix with zero diagonal."""

    values: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative weight vector summing to one."""

    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def __post_init__(self):
        object.__setattr__(self, "weights", _freeze(self.weights))


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative coupling matrix of total mass one.

    Build through :meth:`coupling` (both marginals constrained) or
    :meth:`semi_relaxed` (row marginals only); both verify their marginal
    contract at construction time.
    """

    mass: np.ndarray
    semirelaxed: bool = False

    @property
    def rows(self) -> int:
        return self.mass.shape[0]

    @property
    def cols(self) -> int:
        return self.mass.shape[1]

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        if mass.ndim != 2:
            raise ShapeMismatchError("transport plan must be a 2-d array")
        if np.any(mass < 0):
            raise NegativeEntryError("transport plan has negative mass")
        total = float(mass.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ShapeMismatchError(f"total transported mass is {total}, expected 1")
        object.__setattr__(self, "mass", _freeze(mass))

    @classmethod
    def coupling(cls, mass, mu: DiscreteMeasure, nu: DiscreteMeasure) -> "TransportPlan":
        plan = cls(np.asarray(mass, dtype=np.float64))
        row_err = float(np.max(np.abs(plan.row_marginal() - mu.weights)))
        col_err = float(np.max(np.abs(plan.col_marginal() - nu.weights)))
        if row_err > MARGINAL_TOL or col_err > MARGINAL_TOL:
            raise ShapeMismatchError(
                f"coupling marginals off by (rows {row_err:.3e}, cols {col_err:.3e})"
            )
        return plan

    @classmethod
    def semi_relaxed(cls, mass, mu: DiscreteMeasure) -> "TransportPlan":
        plan = cls(np.asarray(mass, dtype=np.float64), semirelaxed=True)
        row_err = float(np.max(np.abs(plan.row_marginal() - mu.weights)))
        if row_err > MARGINAL_TOL:
            raise ShapeMismatchError(f"row marginals off by {row_err:.3e}")
        return plan

    def row_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    def col_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=0)


@dataclass(frozen=True)
class Embedding:
    """Coordinate matrix, one row per point."""

    points: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2:
            raise ShapeMismatchError("embedding must be a 2-d array")
        if not np.all(np.isfinite(points)):
            raise NonFiniteInputError("embedding has non-finite coordinates")
        object.__setattr__(self, "points", _freeze(points))


@dataclass(frozen=True)
class MultiViewDataset:
    """S distance-matrix views over a common sample set, with optional labels."""

    views: tuple
    labels: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.views[0].size

    @property
    def n_views(self) -> int:
        return len(self.views)

    def __post_init__(self):
        views = tuple(self.views)
        if len(views) == 0:
            raise EmptyViewsError("a multi-view dataset needs at least one view")
        sizes = {v.size for v in views}
        if len(sizes) != 1:
            raise ShapeMismatchError(f"views disagree on sample count: {sorted(sizes)}")
        object.__setattr__(self, "views", views)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (views[0].size,):
                raise LengthMismatchError("labels length must match the sample count")
            labels = np.ascontiguousarray(labels, dtype=np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)


def validate_distance_matrix(values) -> DistanceMatrix:
    """Validate (and lightly repair) a raw array into a :class:`DistanceMatrix`.

    Asymmetry up to ``SYMMETRY_TOL`` is repaired by averaging with the
    transpose; anything larger is treated as a data bug. The diagonal must be
    zero up to ``DIAGONAL_TOL`` and is zeroed exactly in the result.
    """
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInputError("distance matrix has non-finite entries")
    if np.any(a < 0):
        raise NegativeEntryError("distance matrix has negative entries")
    diag = np.abs(np.diagonal(a))
    if diag.size and float(diag.max()) > DIAGONAL_TOL:
        raise NonzeroDiagonalError(f"diagonal magnitude up to {float(diag.max()):.3e}")
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > SYMMETRY_TOL:
        raise AsymmetryError(f"asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return DistanceMatrix(a)


def uniform_measure(n: int) -> DiscreteMeasure:
    """Uniform weights 1/n on n atoms."""
    if n < 1:
        raise ZeroSizeError("a measure needs at least one atom")
    return DiscreteMeasure(np.full(n, 1.0 / n))


def measure_from_weights(weights) -> DiscreteMeasure:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ZeroSizeError("weights must be a nonempty vector")
    if np.any(w < 0):
        raise NegativeEntryError("measure weights must be nonnegative")
    total = float(w.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise ShapeMismatchError(f"weights sum to {total}, expected 1")
    return DiscreteMeasure(w)


def euclidean_distances(points) -> DistanceMatrix:
    """Pairwise Euclidean distance matrix of a coordinate array or Embedding."""
    if isinstance(points, Embedding):
        points = points.points
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ShapeMismatchError("expected an (n, d) coordinate array")
    if not np.all(np.isfinite(pts)):
        raise NonFiniteInputError("coordinates have non-finite entries")
    d = cdist(pts, pts)
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)


def as_matrix(x) -> np.ndarray:
    """Raw float64 view of a DistanceMatrix or array-like."""
    if isinstance(x, DistanceMatrix):
        return x.values
    return np.asarray(x, dtype=np.float64)


def as_weights(x, n: int | None = None) -> np.ndarray:
    """Raw weight vector of a DiscreteMeasure or array-like; None means uniform."""
    if x is None:
        if n is None:
            raise ZeroSizeError("cannot default to uniform without a size")
        return np.full(n, 1.0 / n)
    if isinstance(x, DiscreteMeasure):
        return x.weights
    return np.asarray(x, dtype=np.float64)


def split_seeds(seed: int, count: int) -> list:
    """Deterministically derive independent generators from one root seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]
