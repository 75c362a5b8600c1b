"""Estimator-style wrappers (fit / transform / predict) around the pipeline stages."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import ay
from . import fractal as fr
from . import minimal as mn
from .config import LETTERS


def _angles(X) -> np.ndarray:
    X = check_array(X, ensure_2d=False, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError("expected a single column of angles")
        X = X[:, 0]
    return X


def _check_depth(depth, name="depth"):
    if not isinstance(depth, (int, np.integer)) or depth < 1:
        raise ValueError(f"{name} must be a positive integer, got {depth!r}")


class FractalSupport(BaseEstimator, TransformerMixin):
    """Support values and extreme points of the depth-n fractal of one letter.

    ``transform`` maps angles theta to min Re(exp(i theta) z) over the fractal;
    ``predict`` returns one minimizing point per angle as (re, im) rows.
    """

    def __init__(self, letter: str = "1", depth: int = 14, theta: float = 0.0):
        self.letter = letter
        self.depth = depth
        self.theta = theta

    def fit(self, X=None, y=None):
        if self.letter not in LETTERS:
            raise ValueError(f"unknown letter {self.letter!r}")
        _check_depth(self.depth)
        self.system_ = ay.system(self.theta)
        self.cloud_ = fr.cloud(self.letter, self.depth, self.system_)
        return self

    def transform(self, X):
        check_is_fitted(self, "cloud_")
        taus = np.exp(1j * _angles(X))
        return fr.support_function(self.letter, self.depth, taus, self.system_)

    def predict(self, X):
        check_is_fitted(self, "cloud_")
        taus = np.exp(1j * _angles(X))
        z = self.cloud_.points
        idx = np.argmin((taus[:, None] * z[None, :]).real, axis=1)
        return np.column_stack([z[idx].real, z[idx].imag])


class MinimalSequence(BaseEstimator, TransformerMixin):
    """Window of a minimal sequence; ``transform`` maps integers n to Re gamma_n."""

    def __init__(self, theta: float = ay.DEFAULT_THETA, radius: int = 10_000, power: int | None = None,
                 rho: float = 0.4):
        self.theta = theta
        self.radius = radius
        self.power = power
        self.rho = rho

    def fit(self, X=None, y=None):
        _check_depth(self.radius, "radius")
        if self.power is not None:
            _check_depth(self.power, "power")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        self.result_ = ay.minimal_window(self.theta, self.radius, self.power)
        self.window_ = self.result_.window
        self.ns_, self.re_sums_ = self.result_.re_sums()
        self.growth_ = mn.growth_check(self.window_, ay.gamma(self.theta), self.rho)
        return self

    def transform(self, X):
        check_is_fitted(self, "window_")
        n = check_array(X, ensure_2d=False, dtype=np.int64).ravel()
        lo, hi = -self.window_.n_back, self.window_.n_fwd
        if ((n < lo) | (n > hi)).any():
            raise ValueError(f"indices must lie in [{lo}, {hi}]")
        return self.re_sums_[n - lo]


class WanderingConjugacy(BaseEstimator, TransformerMixin):
    """Affine interval exchange semi-conjugate to the cubic map.

    ``transform`` is g (t -> mu([0, t))), ``inverse_transform`` is h and
    ``predict`` evaluates the synthesized affine map.
    """

    def __init__(self, theta: float = ay.DEFAULT_THETA, N: int = 5000, n_orbit: int = 500):
        self.theta = theta
        self.N = N
        self.n_orbit = n_orbit

    def fit(self, X=None, y=None):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not isinstance(self.n_orbit, (int, np.integer)) or self.n_orbit < 0:
            raise ValueError("n_orbit must be a non-negative integer")
        self.result_ = ay.wandering_pipeline(self.theta, self.N, self.n_orbit)
        self.affine_ = self.result_.synthesis.f
        self.slopes_ = {a: float(s) for a, s in self.result_.measure.slopes.items()}
        return self

    @staticmethod
    def _unit(X) -> np.ndarray:
        t = check_array(X, ensure_2d=False, dtype=float).ravel()
        if ((t < 0) | (t >= 1)).any():
            raise ValueError("points must lie in [0, 1)")
        return t

    def transform(self, X):
        check_is_fitted(self, "result_")
        return self.result_.conjugacy.g_many(self._unit(X))

    def inverse_transform(self, X):
        check_is_fitted(self, "result_")
        return self.result_.conjugacy.h_many(self._unit(X))

    def predict(self, X):
        check_is_fitted(self, "result_")
        return self.affine_.evaluate_many(self._unit(X))
