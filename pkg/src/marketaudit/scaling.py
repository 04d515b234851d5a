"""Divisor scaling: map prices into [0, 1] by dividing by a fitted divisor.

The divisor is the training maximum times (1 + headroom), so future prices
up to that margin above anything seen in training still land inside the
unit interval. Values beyond the divisor are not clipped; they scale above
1 and the downstream range audit flags them.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import EmptySeries, InvalidParam
from .validation import closes_of, require_finite


class DivisorScaler(TransformerMixin, BaseEstimator):
    """Scale prices by a single positive divisor; exactly invertible.

    Parameters:
        headroom: fraction added above the training maximum when choosing
            the divisor. 0 puts the training maximum exactly at 1.0.

    Attributes (after fit):
        train_max_: maximum of the training prices.
        divisor_: train_max_ * (1 + headroom).
    """

    def __init__(self, headroom: float = 0.1):
        self.headroom = headroom

    def fit(self, X, y=None) -> "DivisorScaler":
        """Fit the divisor from a PriceSeries or a 1-D sequence of prices."""
        if not math.isfinite(self.headroom) or self.headroom < 0:
            raise InvalidParam(f"headroom must be >= 0, got {self.headroom!r}")
        prices = closes_of(X)
        if prices.size == 0:
            raise EmptySeries("cannot fit a scaler on an empty series")
        require_finite(prices, "training prices")
        self.train_max_ = float(np.max(prices))
        if self.train_max_ <= 0:
            raise InvalidParam(f"training maximum must be > 0, got {self.train_max_!r}")
        self.divisor_ = self.train_max_ * (1.0 + self.headroom)
        return self

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        return closes_of(X) / self.divisor_

    def inverse_transform(self, Y) -> np.ndarray:
        self._check_fitted()
        return closes_of(Y) * self.divisor_

    def to_dict(self) -> dict:
        """Serializable record of the fitted transform."""
        self._check_fitted()
        return {"divisor": self.divisor_, "headroom": self.headroom}

    def _check_fitted(self) -> None:
        if not hasattr(self, "divisor_"):
            raise NotFittedError("DivisorScaler must be fitted before use")
