"""Gaussian model over prediction errors and squared-Mahalanobis scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FORMAT_VERSION = 1


@dataclass
class ErrorModel:
    mean: np.ndarray
    cov: np.ndarray
    ridge: float
    precision: np.ndarray  # inverse of (cov + ridge * I), precomputed at fit

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def to_obj(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "error_model",
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "ridge": self.ridge,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ErrorModel":
        if obj.get("format_version") != FORMAT_VERSION:
            raise ValueError("unsupported error model format version")
        mean = np.asarray(obj["mean"], dtype=float)
        cov = np.asarray(obj["cov"], dtype=float)
        ridge = float(obj["ridge"])
        precision = np.linalg.inv(cov + ridge * np.eye(len(mean)))
        return cls(mean=mean, cov=cov, ridge=ridge, precision=precision)


def default_ridge(cov: np.ndarray) -> float:
    """Trace-scaled ridge keeping near-degenerate error clouds invertible."""
    dim = cov.shape[0]
    return 1e-6 * float(np.trace(cov)) / dim


def fit_error_model(errors: np.ndarray, ridge: float | None = None) -> ErrorModel:
    """Maximum-likelihood Gaussian fit (1/N covariance normalization).

    The inverse is computed once on ``cov + ridge * I``; with ``ridge=None``
    the trace-scaled default is used. A constant error cloud (zero
    covariance) still yields a usable model through the ridge.
    """
    errors = np.asarray(errors, dtype=float)
    if errors.ndim != 2 or errors.shape[0] < 2:
        raise ValueError("need at least 2 error vectors")
    mean = errors.mean(axis=0)
    centered = errors - mean
    cov = centered.T @ centered / errors.shape[0]
    if ridge is None:
        ridge = default_ridge(cov)
        if ridge == 0.0:
            ridge = 1e-12
    precision = np.linalg.inv(cov + ridge * np.eye(cov.shape[0]))
    return ErrorModel(mean=mean, cov=cov, ridge=float(ridge), precision=precision)


def anomaly_scores(model: ErrorModel, errors: np.ndarray) -> np.ndarray:
    """Squared Mahalanobis distance of each error vector under the model."""
    errors = np.atleast_2d(np.asarray(errors, dtype=float))
    if errors.shape[1] != model.dim:
        raise ValueError(
            f"error dimension {errors.shape[1]} does not match model dim {model.dim}")
    centered = errors - model.mean
    return np.einsum("ij,jk,ik->i", centered, model.precision, centered)
