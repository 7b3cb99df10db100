"""Representation quality: distances, coverage error, uniformity, cardinality.

For integer points the 1-norm and Chebyshev results are exact ints; other
norms return floats.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DimensionError


@dataclass(frozen=True)
class DistanceSpec:
    t: float = math.inf

    def __post_init__(self):
        if not (self.t == math.inf or self.t >= 1):
            raise ValueError(f"norm order must be >= 1 or inf, got {self.t}")

    @property
    def exact(self) -> bool:
        return self.t in (1, math.inf)


CHEBYSHEV = DistanceSpec()


def _spec(spec) -> DistanceSpec:
    if spec is None:
        return CHEBYSHEV
    return spec if isinstance(spec, DistanceSpec) else DistanceSpec(spec)


def distance(z, w, spec=None):
    spec = _spec(spec)
    if len(z) != len(w):
        raise DimensionError(f"cannot measure between lengths {len(z)} and {len(w)}")
    gaps = [abs(a - b) for a, b in zip(z, w)]
    if spec.t == math.inf:
        return max(gaps, default=0)
    if spec.t == 1:
        return sum(gaps)
    return math.fsum(g ** spec.t for g in gaps) ** (1.0 / spec.t)


def _as_array(points, name):
    arr = np.asarray([tuple(p) for p in points])
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a list of equal-length vectors")
    return arr


def _finish(value: float, spec: DistanceSpec, integral: bool):
    if spec.exact and integral:
        return int(round(value))
    return float(value)


def coverage_error(R: Sequence, N_ref: Sequence, spec=None):
    """Largest distance from a reference point to its nearest representative."""
    spec = _spec(spec)
    if len(R) == 0:
        raise ValueError("coverage error is undefined for an empty representation")
    if len(N_ref) == 0:
        return 0
    Ra, Na = _as_array(R, "R"), _as_array(N_ref, "N_ref")
    if Ra.shape[1] != Na.shape[1]:
        raise DimensionError("representation and reference have different dimensions")
    if not {tuple(r) for r in R} <= {tuple(z) for z in N_ref}:
        warnings.warn("representation contains points outside the reference front", stacklevel=2)
    integral = np.issubdtype(Ra.dtype, np.integer) and np.issubdtype(Na.dtype, np.integer)
    val = kernels.coverage(np.ascontiguousarray(Na, dtype=float),
                           np.ascontiguousarray(Ra, dtype=float), float(spec.t))
    return _finish(val, spec, integral)


def uniformity_level(R: Sequence, spec=None):
    """Smallest pairwise distance inside the representation."""
    spec = _spec(spec)
    if len(R) < 2:
        raise ValueError("uniformity level needs at least two points")
    Ra = _as_array(R, "R")
    integral = np.issubdtype(Ra.dtype, np.integer)
    val = kernels.uniformity(np.ascontiguousarray(Ra, dtype=float), float(spec.t))
    return _finish(val, spec, integral)


def coordinate_gaps(R: Sequence) -> tuple:
    """Per objective, the widest gap between consecutive distinct values in ``R``."""
    if not len(R):
        return ()
    Ra = _as_array(R, "R")
    out = []
    for col in Ra.T:
        vals = np.unique(col)
        out.append(int(np.diff(vals).max()) if vals.size > 1 else 0)
    return tuple(out)


def slice_coverage_gap(max_gap: int) -> int:
    """Longest run of integers left uncovered by a gap of ``max_gap`` between covered values."""
    return max(int(max_gap) - 1, 0)


@dataclass
class QualityReport:
    cardinality: int
    coverage_error: Optional[float]
    uniformity_level: Optional[float]
    coordinate_gaps: tuple = ()
    norm: float = math.inf
    extra: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {"cardinality": self.cardinality,
                "coverage_error": self.coverage_error,
                "uniformity_level": self.uniformity_level,
                "coordinate_gaps": " ".join(str(g) for g in self.coordinate_gaps),
                "norm": "inf" if self.norm == math.inf else self.norm}


def quality_report(R: Sequence, N_ref: Optional[Sequence] = None, spec=None) -> QualityReport:
    spec = _spec(spec)
    if len(R) == 0:
        raise ValueError("cannot report on an empty representation")
    gamma = None if N_ref is None else coverage_error(R, N_ref, spec)
    delta = uniformity_level(R, spec) if len(R) >= 2 else None
    return QualityReport(len(R), gamma, delta, coordinate_gaps(R), spec.t)
