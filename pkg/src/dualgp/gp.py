"""Exact Gaussian-process regression for small, growing data sets.

The controller in this package observes one data point per step, so the
model is built around cheap incremental updates: a cached Cholesky factor
of the noisy covariance matrix is extended by one row per observation,
and every query (posterior mean/variance, bordered log-determinants for
information scoring) is answered through triangular solves against that
factor. No explicit matrix inverse is ever formed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "FactorizationError",
    "KernelConfig",
    "DataSet",
    "Posterior",
    "GpModel",
    "gaussian_entropy",
]

LOG_2PI = float(np.log(2.0 * np.pi))


class FactorizationError(ValueError):
    """Covariance matrix could not be factorized (not positive definite)."""


def _as_point(x, dim=None):
    """Coerce a query point to a finite 1-D float vector."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ValueError(f"query point must be a vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"query point contains non-finite values: {p}")
    if dim is not None and p.shape[0] != dim:
        raise ValueError(f"query point has dimension {p.shape[0]}, expected {dim}")
    return p


@dataclass(frozen=True)
class KernelConfig:
    """Squared-exponential kernel a*exp(-||x - x'||^2 / (2 l^2)).

    ``signal_variance`` is the amplitude a (the kernel's value at zero
    distance), ``length_scale`` the isotropic scale l, and ``jitter`` a
    non-negative stabilizer added to diagonal entries during
    factorization.
    """

    signal_variance: float = 1.0
    length_scale: float = 1.0
    jitter: float = 1e-9

    def __post_init__(self):
        if not (self.signal_variance > 0):
            raise ValueError(f"signal_variance must be > 0, got {self.signal_variance}")
        if not (self.length_scale > 0):
            raise ValueError(f"length_scale must be > 0, got {self.length_scale}")
        if not (self.jitter >= 0):
            raise ValueError(f"jitter must be >= 0, got {self.jitter}")

    def value(self, x, x2) -> float:
        """Kernel between two points; symmetric, in (0, signal_variance]."""
        p = _as_point(x)
        q = _as_point(x2, dim=p.shape[0])
        d2 = float(np.sum((p - q) ** 2))
        return float(self.signal_variance * np.exp(-0.5 * d2 / self.length_scale**2))

    def cross(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Kernel matrix between two point sets, shape (len(rows), len(cols))."""
        rows = np.atleast_2d(rows)
        cols = np.atleast_2d(cols)
        # squared distances may overflow for wildly divergent queries; the
        # kernel limit is exp(-inf) = 0, which is the right answer anyway
        with np.errstate(over="ignore"):
            d2 = np.sum((rows[:, None, :] - cols[None, :, :]) ** 2, axis=-1)
        return self.signal_variance * np.exp(-0.5 * d2 / self.length_scale**2)


class DataSet:
    """Immutable training set: M input vectors of equal dimension plus M scalar targets."""

    def __init__(self, inputs, targets, dim=None):
        inputs = np.asarray(inputs, dtype=float)
        targets = np.asarray(targets, dtype=float).reshape(-1)
        if inputs.size == 0:
            if dim is None:
                raise ValueError("empty DataSet needs an explicit input dimension")
            inputs = inputs.reshape(0, dim)
        if inputs.ndim == 1:
            inputs = inputs[:, None]
        if inputs.ndim != 2:
            raise ValueError(f"inputs must be an (M, d) array, got shape {inputs.shape}")
        if dim is not None and inputs.shape[1] != dim:
            raise ValueError(f"inputs have dimension {inputs.shape[1]}, expected {dim}")
        if inputs.shape[0] != targets.shape[0]:
            raise ValueError(
                f"{inputs.shape[0]} inputs but {targets.shape[0]} targets"
            )
        if not np.all(np.isfinite(inputs)):
            raise ValueError("inputs contain non-finite values")
        if not np.all(np.isfinite(targets)):
            raise ValueError("targets contain non-finite values")
        self.inputs = inputs
        self.targets = targets
        self.inputs.setflags(write=False)
        self.targets.setflags(write=False)

    @classmethod
    def empty(cls, dim: int) -> "DataSet":
        return cls(np.zeros((0, dim)), np.zeros(0), dim=dim)

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def append(self, x, y) -> "DataSet":
        x = _as_point(x, dim=self.dim)
        return DataSet(
            np.vstack([self.inputs, x[None, :]]),
            np.append(self.targets, float(y)),
            dim=self.dim,
        )


@dataclass(frozen=True)
class Posterior:
    """Predictive mean and (non-negative) variance at a single query point."""

    mean: float
    variance: float


def _name_duplicates(inputs, tol=1e-12):
    """Find index pairs of (near-)duplicate rows, for factorization error messages."""
    pairs = []
    for i in range(len(inputs)):
        for j in range(i + 1, len(inputs)):
            if np.linalg.norm(inputs[i] - inputs[j]) <= tol:
                pairs.append((i, j))
    return pairs


class GpModel:
    """Zero-mean GP conditioned on a DataSet, with a cached Cholesky factor.

    Immutable: queries never change the model, and adding an observation
    returns a new model value. The covariance of the training set is
    K + (noise_variance + jitter) * I where K is the kernel Gram matrix;
    the prior predictive variance at any point is
    kappa = signal_variance + noise_variance.
    """

    def __init__(self, kernel: KernelConfig, noise_variance: float, data: DataSet):
        if not (noise_variance >= 0):
            raise ValueError(f"noise_variance must be >= 0, got {noise_variance}")
        self.kernel = kernel
        self.noise_variance = float(noise_variance)
        self.data = data
        self._chol = self._factorize()
        # alpha = C^{-1} y via two triangular solves
        if len(data) > 0:
            z = solve_triangular(self._chol, data.targets, lower=True)
            self._alpha = solve_triangular(self._chol, z, lower=True, trans="T")
        else:
            self._alpha = np.zeros(0)

    @classmethod
    def empty(cls, kernel: KernelConfig, noise_variance: float, dim: int) -> "GpModel":
        return cls(kernel, noise_variance, DataSet.empty(dim))

    # -- construction ------------------------------------------------------

    def _diagonal_boost(self) -> float:
        return self.noise_variance + self.kernel.jitter

    def covariance_matrix(self) -> np.ndarray:
        """Dense training covariance K + (noise + jitter) I, shape (M, M)."""
        n = len(self.data)
        c = self.kernel.cross(self.data.inputs, self.data.inputs)
        c[np.diag_indices(n)] += self._diagonal_boost()
        return c

    def _factorize(self) -> np.ndarray:
        n = len(self.data)
        if n == 0:
            return np.zeros((0, 0))
        try:
            return np.linalg.cholesky(self.covariance_matrix())
        except np.linalg.LinAlgError:
            pairs = _name_duplicates(self.data.inputs)
            if pairs:
                raise FactorizationError(
                    "training covariance is singular; duplicate input pairs "
                    f"(index pairs {pairs}) with no noise or jitter on the diagonal"
                ) from None
            raise FactorizationError(
                "training covariance is not positive definite"
            ) from None

    def with_observation(self, x, y) -> "GpModel":
        """New model with one more (input, target) pair.

        Extends the cached factor by a single row instead of refactorizing
        the full matrix; falls back to a full factorization if round-off
        makes the extended pivot non-positive.
        """
        x = _as_point(x, dim=self.dim)
        new_data = self.data.append(x, y)
        n = len(self.data)
        if n > 0:
            k = self.kernel.cross(self.data.inputs, x[None, :])[:, 0]
            w = solve_triangular(self._chol, k, lower=True)
            pivot = self.kernel.signal_variance + self._diagonal_boost() - float(w @ w)
        else:
            w = np.zeros(0)
            pivot = self.kernel.signal_variance + self._diagonal_boost()
        if pivot <= 0:
            return GpModel(self.kernel, self.noise_variance, new_data)
        extended = np.zeros((n + 1, n + 1))
        extended[:n, :n] = self._chol
        extended[n, :n] = w
        extended[n, n] = np.sqrt(pivot)
        return GpModel._from_factor(self.kernel, self.noise_variance, new_data, extended)

    @classmethod
    def _from_factor(cls, kernel, noise_variance, data, chol) -> "GpModel":
        model = cls.__new__(cls)
        model.kernel = kernel
        model.noise_variance = float(noise_variance)
        model.data = data
        model._chol = chol
        z = solve_triangular(chol, data.targets, lower=True)
        model._alpha = solve_triangular(chol, z, lower=True, trans="T")
        return model

    # -- queries -----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.data.dim

    @property
    def prior_variance(self) -> float:
        """Predictive variance with no data: kernel amplitude plus noise."""
        return self.kernel.signal_variance + self.noise_variance

    def log_det(self) -> float:
        """ln det of the training covariance (0 for an empty model)."""
        if len(self.data) == 0:
            return 0.0
        return float(2.0 * np.sum(np.log(np.diag(self._chol))))

    def posterior_batch(self, points: np.ndarray):
        """Means and variances at many query points, shape (n,) each.

        Variances are clamped to [0, prior_variance]; conditioning on data
        can only shrink them, so anything outside is round-off.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise ValueError(
                f"query points have dimension {points.shape[1]}, expected {self.dim}"
            )
        if not np.all(np.isfinite(points)):
            raise ValueError("query points contain non-finite values")
        kappa = self.prior_variance
        if len(self.data) == 0:
            n = points.shape[0]
            return np.zeros(n), np.full(n, kappa)
        k = self.kernel.cross(self.data.inputs, points)
        means = k.T @ self._alpha
        w = solve_triangular(self._chol, k, lower=True)
        variances = kappa - np.sum(w * w, axis=0)
        return means, np.clip(variances, 0.0, kappa)

    def posterior(self, x) -> Posterior:
        """Predictive distribution at one point."""
        x = _as_point(x, dim=self.dim)
        means, variances = self.posterior_batch(x[None, :])
        return Posterior(mean=float(means[0]), variance=float(variances[0]))

    def extended_log_det(self, points) -> float:
        """ln det of the training covariance bordered by extra probe points.

        The (M + p) x (M + p) matrix appends, for each probe point, a
        kernel row/column against the training inputs and a diagonal
        entry of signal_variance + noise + jitter. Evaluated through the
        cached factor and the p x p Schur complement.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValueError(
                f"border points have dimension {pts.shape[1]}, expected {self.dim}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("border points contain non-finite values")
        block = self.kernel.cross(pts, pts)
        block[np.diag_indices(pts.shape[0])] += self._diagonal_boost()
        if len(self.data) > 0:
            k = self.kernel.cross(self.data.inputs, pts)
            w = solve_triangular(self._chol, k, lower=True)
            block = block - w.T @ w
        try:
            chol_block = np.linalg.cholesky(block)
        except np.linalg.LinAlgError:
            raise FactorizationError(
                "bordered covariance is singular; duplicate border points "
                "with no noise or jitter on the diagonal"
            ) from None
        return self.log_det() + float(2.0 * np.sum(np.log(np.diag(chol_block))))


def gaussian_entropy(dim: int, log_det_cov: float) -> float:
    """Differential entropy of a dim-variate Gaussian with the given ln det.

    H = dim/2 + (dim/2) ln(2 pi) + ln_det / 2, in nats.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if not np.isfinite(log_det_cov):
        raise ValueError(f"log_det_cov must be finite, got {log_det_cov}")
    return 0.5 * dim * (1.0 + LOG_2PI) + 0.5 * float(log_det_cov)
