"""Scoring and selection of informative sample points for GP system ID.

Given a model and a finite candidate set, two strategies pick the next
input to probe. The exhaustive one minimizes the summed log-determinant
of the doubly bordered covariance over the whole set; working in log
space keeps the products of determinants from underflowing while leaving
the argmin unchanged. The greedy one simply takes the candidate with the
largest posterior variance.
"""

from dataclasses import dataclass

import numpy as np

from .gp import GpModel

__all__ = [
    "CandidateSet",
    "SelectionResult",
    "sample_candidates",
    "info_score",
    "aggregate_log_det",
    "select_exhaustive",
    "select_max_variance",
]

# below this separation a candidate counts as a duplicate of a training input
DUPLICATE_TOL = 1e-12


class CandidateSet:
    """Finite set of d-dimensional points eligible as the next probe."""

    def __init__(self, points, dim=None):
        points = np.asarray(points, dtype=float)
        if points.size == 0:
            if dim is None:
                raise ValueError("empty CandidateSet needs an explicit dimension")
            points = points.reshape(0, dim)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2:
            raise ValueError(f"points must be an (n, d) array, got shape {points.shape}")
        if dim is not None and points.shape[1] != dim:
            raise ValueError(f"points have dimension {points.shape[1]}, expected {dim}")
        if not np.all(np.isfinite(points)):
            raise ValueError("candidate points contain non-finite values")
        self.points = points
        self.points.setflags(write=False)

    @classmethod
    def empty(cls, dim: int) -> "CandidateSet":
        return cls(np.zeros((0, dim)), dim=dim)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class SelectionResult:
    """Chosen candidate: its index in the set, the point, and its score.

    For exhaustive selection the score is the summed bordered log-det
    (lower = more informative); for greedy selection it is the posterior
    variance at the point (higher = more informative).
    """

    index: int
    point: np.ndarray
    score: float


def _require_scoreable(model: GpModel, candidates: CandidateSet):
    if len(candidates) == 0:
        raise ValueError("candidate set is empty")
    if candidates.dim != model.dim:
        raise ValueError(
            f"candidates have dimension {candidates.dim}, model expects {model.dim}"
        )


def _check_disjoint(model: GpModel, candidates: CandidateSet):
    # keep Theta disjoint from the training inputs when picking a probe,
    # else the sigma=0 case goes singular and re-measuring known points
    # can look informative
    if len(model.data) == 0:
        return
    d2 = np.sum(
        (candidates.points[:, None, :] - model.data.inputs[None, :, :]) ** 2,
        axis=-1,
    )
    hit = np.argwhere(np.sqrt(d2) <= DUPLICATE_TOL)
    if hit.size:
        i, j = hit[0]
        raise ValueError(
            f"candidate {i} duplicates training input {j} (within {DUPLICATE_TOL})"
        )


def info_score(model: GpModel, candidates: CandidateSet, probe) -> float:
    """Summed log-det of the covariance bordered by (candidate, probe) pairs.

    One term per candidate x: ln det of the training covariance extended
    by both x and the probe. Lower totals mean the probe explains more of
    the set. Deterministic in the iteration order of the set.
    """
    _require_scoreable(model, candidates)
    probe = np.asarray(probe, dtype=float).reshape(-1)
    total = 0.0
    for x in candidates.points:
        total += model.extended_log_det(np.vstack([x, probe]))
    return total


def aggregate_log_det(model: GpModel, candidates: CandidateSet) -> float:
    """Summed log-det of the covariance bordered by each candidate alone.

    A scalar proxy for how uncertain the model still is across the set;
    absorbing a new observation never increases it as long as the prior
    predictive variance stays below one.
    """
    _require_scoreable(model, candidates)
    return sum(model.extended_log_det(x[None, :]) for x in candidates.points)


def select_exhaustive(model: GpModel, candidates: CandidateSet) -> SelectionResult:
    """Probe minimizing info_score over the candidate set; ties take the lowest index."""
    _require_scoreable(model, candidates)
    _check_disjoint(model, candidates)
    scores = np.array(
        [info_score(model, candidates, probe) for probe in candidates.points]
    )
    idx = int(np.argmin(scores))
    return SelectionResult(index=idx, point=candidates.points[idx], score=float(scores[idx]))


def select_max_variance(model: GpModel, candidates: CandidateSet) -> SelectionResult:
    """Candidate with the largest posterior variance; ties take the lowest index."""
    _require_scoreable(model, candidates)
    _check_disjoint(model, candidates)
    _, variances = model.posterior_batch(candidates.points)
    idx = int(np.argmax(variances))
    return SelectionResult(
        index=idx, point=candidates.points[idx], score=float(variances[idx])
    )


def sample_candidates(
    bounds,
    n: int,
    mode: str = "grid",
    seed=None,
    exclusions=None,
) -> CandidateSet:
    """Draw up to n points from a box domain as a CandidateSet.

    ``bounds`` is one (low, high) pair per dimension. Grid mode places
    evenly spaced points including the endpoints (1-D: n points; 2-D:
    floor(sqrt(n)) per axis); uniform_random draws n points reproducibly
    from the seed. Points within 1e-12 of any exclusion row are dropped,
    so the result can be empty; callers must check before selecting.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    dim = len(bounds)
    if dim == 0:
        raise ValueError("bounds must cover at least one dimension")
    for lo, hi in bounds:
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError(f"invalid bounds ({lo}, {hi}): need finite low < high")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")

    if mode == "grid":
        if dim == 1:
            lo, hi = bounds[0]
            pts = np.linspace(lo, hi, n)[:, None]
        elif dim == 2:
            per_axis = max(1, int(np.floor(np.sqrt(n))))
            axes = [np.linspace(lo, hi, per_axis) for lo, hi in bounds]
            g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
            pts = np.column_stack([g0.ravel(), g1.ravel()])
        else:
            raise ValueError(f"grid mode supports 1-D and 2-D domains, got {dim}-D")
    elif mode == "uniform_random":
        rng = np.random.default_rng(seed)
        lows = np.array([lo for lo, _ in bounds])
        highs = np.array([hi for _, hi in bounds])
        pts = rng.uniform(lows, highs, size=(n, dim))
    else:
        raise ValueError(f"unknown mode {mode!r}: expected 'grid' or 'uniform_random'")

    if exclusions is not None:
        excl = np.atleast_2d(np.asarray(exclusions, dtype=float))
        if excl.size:
            if excl.shape[1] != dim:
                raise ValueError(
                    f"exclusions have dimension {excl.shape[1]}, expected {dim}"
                )
            dist = np.sqrt(
                np.sum((pts[:, None, :] - excl[None, :, :]) ** 2, axis=-1)
            )
            pts = pts[np.all(dist > DUPLICATE_TOL, axis=1)]

    return CandidateSet(pts, dim=dim)
