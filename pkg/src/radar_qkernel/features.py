"""Train-only preprocessing: flatten, standardize, PCA bottleneck, angular rescale.

Every transform is fitted from the training partition and then applied
unchanged to any other rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCALE_FLOOR = 1e-12


def flatten(products) -> np.ndarray:
    """Stack 2D products (arrays or objects with ``.values``) into ``[n, rows*cols]``."""
    rows = [np.asarray(getattr(p, "values", p), dtype=float).ravel() for p in products]
    return np.vstack(rows)


def _check_matrix(X: np.ndarray, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, train: np.ndarray) -> "Standardizer":
        train = _check_matrix(train, "train")
        if train.shape[0] == 0:
            raise ValueError("cannot fit a standardizer on an empty training set")
        mean = train.mean(axis=0)
        # Population variance; constant columns map to zero instead of blowing up.
        scale = np.maximum(train.std(axis=0), SCALE_FLOOR)
        return cls(mean, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = _check_matrix(X)
        return (X - self.mean) / self.scale


def fit_standardizer(train: np.ndarray) -> Standardizer:
    return Standardizer.fit(train)


def apply_standardizer(s: Standardizer, X: np.ndarray) -> np.ndarray:
    return s.transform(X)


@dataclass(frozen=True)
class PcaModel:
    components: np.ndarray  # [d, D], orthonormal rows
    center: np.ndarray
    singular_values: np.ndarray
    total_variance: float

    @property
    def d(self) -> int:
        return self.components.shape[0]

    @classmethod
    def fit(cls, train: np.ndarray, d: int) -> "PcaModel":
        train = _check_matrix(train, "train")
        n, D = train.shape
        if d < 1 or d > min(n - 1, D):
            raise ValueError(f"d={d} too large for a {n} x {D} training matrix")
        center = train.mean(axis=0)
        centred = train - center
        _, s, vt = np.linalg.svd(centred, full_matrices=False)
        comps = vt[:d].copy()
        # Sign convention: the largest-magnitude coordinate of each component is positive.
        pivot = np.argmax(np.abs(comps), axis=1)
        signs = np.sign(comps[np.arange(d), pivot])
        signs[signs == 0] = 1.0
        comps *= signs[:, None]
        return cls(comps, center, s[:d].copy(), float(np.sum(centred**2)))

    def truncate(self, d: int) -> "PcaModel":
        """Leading ``d`` components; equal to refitting with ``d`` on the same data."""
        if not 1 <= d <= self.d:
            raise ValueError(f"cannot truncate {self.d} components to {d}")
        return PcaModel(self.components[:d], self.center, self.singular_values[:d], self.total_variance)

    def explained_variance_ratio(self) -> float:
        if self.total_variance == 0:
            return 0.0
        return float(np.sum(self.singular_values**2) / self.total_variance)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = _check_matrix(X)
        return (X - self.center) @ self.components.T


def fit_pca(train: np.ndarray, d: int) -> PcaModel:
    return PcaModel.fit(train, d)


def project(p: PcaModel, X: np.ndarray) -> np.ndarray:
    return p.transform(X)


@dataclass(frozen=True)
class AngularScaler:
    """Min-max map of training features onto ``[0, pi]``; out-of-range test values are clipped."""

    min: np.ndarray
    max: np.ndarray

    @classmethod
    def fit(cls, train: np.ndarray) -> "AngularScaler":
        train = _check_matrix(train, "train")
        return cls(train.min(axis=0), train.max(axis=0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = _check_matrix(X)
        span = self.max - self.min
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (X - self.min) / safe * np.pi, 0.0)
        return np.clip(out, 0.0, np.pi)


def fit_angular(train: np.ndarray) -> AngularScaler:
    return AngularScaler.fit(train)


def apply_angular(a: AngularScaler, X: np.ndarray) -> np.ndarray:
    return a.transform(X)


@dataclass(frozen=True)
class FeaturePipeline:
    standardizer: Standardizer
    pca: PcaModel
    angular: AngularScaler

    @classmethod
    def fit(cls, train: np.ndarray, d: int) -> "FeaturePipeline":
        std = Standardizer.fit(train)
        pca = PcaModel.fit(std.transform(train), d)
        return cls(std, pca, AngularScaler.fit(pca.transform(std.transform(train))))

    def with_dim(self, d: int) -> "FeaturePipeline":
        """Same standardizer with the PCA and angular scaler cut to the leading ``d`` features.

        Per-feature min/max do not depend on the other features, so slicing the
        scaler equals refitting it on the truncated training projection.
        """
        pca = self.pca.truncate(d)
        return FeaturePipeline(self.standardizer, pca, AngularScaler(self.angular.min[:d], self.angular.max[:d]))

    def pca_features(self, X: np.ndarray) -> np.ndarray:
        return self.pca.transform(self.standardizer.transform(X))

    def angles(self, X: np.ndarray) -> np.ndarray:
        return self.angular.transform(self.pca_features(X))
