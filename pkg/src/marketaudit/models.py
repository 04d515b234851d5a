"""Reference predictors and the prediction-set interchange format.

PersistenceModel is the baseline every candidate must beat: tomorrow's
price is today's. LagRegressor is a least-squares autoregression that,
trained on raw random-walk prices, produces exactly the seductive
low-error, lag-shadowing predictions the audit battery exists to catch.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import (
    DuplicateTimestamp,
    EmptyInput,
    InvalidParam,
    MalformedRow,
    NonMonotonicTimestamp,
    SingularSystem,
    TooShort,
)
from .market_data import PriceSeries, timestamp_key, validate_timestamps

PRICE = "price"
SCALED = "scaled"
MOVEMENT = "movement"
SPACES = (PRICE, SCALED, MOVEMENT)


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Aligned (target, prediction) pairs in a declared value space.

    space "price" means raw price levels, "scaled" means divisor-scaled
    levels, "movement" means per-step price differences. Detectors that
    only make sense for one space check this tag.
    """

    targets: np.ndarray
    predictions: np.ndarray
    aligned_timestamps: tuple[str, ...]
    space: str = PRICE
    symbol: str = ""

    def __post_init__(self):
        object.__setattr__(self, "targets", np.asarray(self.targets, dtype=float))
        object.__setattr__(self, "predictions", np.asarray(self.predictions, dtype=float))
        object.__setattr__(self, "aligned_timestamps", tuple(self.aligned_timestamps))
        if self.space not in SPACES:
            raise InvalidParam(f"space must be one of {SPACES}, got {self.space!r}")
        n = len(self.targets)
        if n == 0:
            raise EmptyInput("a prediction set needs at least one pair")
        if len(self.predictions) != n or len(self.aligned_timestamps) != n:
            raise InvalidParam("targets, predictions, and timestamps must align")
        for name, arr in (("targets", self.targets), ("predictions", self.predictions)):
            if arr.ndim != 1:
                raise InvalidParam(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise InvalidParam(f"{name} contain non-finite values")
        validate_timestamps(self.aligned_timestamps)

    def __len__(self) -> int:
        return len(self.targets)


def read_prediction_csv(text: str, space: str = PRICE, symbol: str = "") -> PredictionSet:
    """Parse the `timestamp,target,prediction` interchange CSV.

    Any external model can emit this format to be audited; the value space
    is declared out of band because the file does not carry it.
    """
    reader = csv.reader(io.StringIO(text))
    header = None
    for row in reader:
        if row:
            header = row
            break
    if header is None:
        raise EmptyInput("no CSV content")
    names = [c.strip().lower() for c in header]
    try:
        cols = (names.index("timestamp"), names.index("target"), names.index("prediction"))
    except ValueError:
        raise MalformedRow(1, f"header must name timestamp, target, prediction; got {header!r}")

    timestamps: list[str] = []
    targets: list[float] = []
    predictions: list[float] = []
    prev_key = None
    kind = None
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) <= max(cols):
            raise MalformedRow(line, f"expected at least {max(cols) + 1} columns")
        raw_ts = row[cols[0]].strip()
        try:
            key = timestamp_key(raw_ts)
        except ValueError:
            raise MalformedRow(line, f"unparseable timestamp {raw_ts!r}")
        if kind is None:
            kind = type(key)
        elif type(key) is not kind:
            raise MalformedRow(line, f"timestamp {raw_ts!r} mixes kinds within one series")
        if prev_key is not None:
            if key == prev_key:
                raise DuplicateTimestamp(line, f"timestamp {raw_ts!r} repeats")
            if key < prev_key:
                raise NonMonotonicTimestamp(line, f"timestamp {raw_ts!r} decreases")
        prev_key = key
        values = []
        for col, what in ((cols[1], "target"), (cols[2], "prediction")):
            raw = row[col].strip()
            try:
                value = float(raw)
            except ValueError:
                raise MalformedRow(line, f"unparseable {what} {raw!r}")
            if not math.isfinite(value):
                raise MalformedRow(line, f"{what} {raw!r} is not finite")
            values.append(value)
        timestamps.append(raw_ts)
        targets.append(values[0])
        predictions.append(values[1])

    if not timestamps:
        raise EmptyInput("no data rows")
    return PredictionSet(
        targets=np.array(targets),
        predictions=np.array(predictions),
        aligned_timestamps=tuple(timestamps),
        space=space,
        symbol=symbol,
    )


def write_prediction_csv(ps: PredictionSet) -> str:
    """Serialize so that read(write(ps), ps.space) reproduces ps exactly."""
    lines = ["timestamp,target,prediction"]
    for ts, t, p in zip(ps.aligned_timestamps, ps.targets, ps.predictions):
        lines.append(f"{ts},{float(t)!r},{float(p)!r}")
    return "\n".join(lines) + "\n"


class PersistenceModel(BaseEstimator):
    """Predict each next close as the current close. Nothing to fit."""

    def fit(self, series: PriceSeries | None = None, y=None) -> "PersistenceModel":
        return self

    def predict(self, series: PriceSeries) -> PredictionSet:
        """One-step-ahead persistence predictions over points 1..n-1."""
        closes = series.closes
        if len(closes) < 2:
            raise TooShort("persistence needs at least 2 points")
        return PredictionSet(
            targets=closes[1:],
            predictions=closes[:-1],
            aligned_timestamps=series.timestamps[1:],
            space=PRICE,
            symbol=series.symbol,
        )


class LagRegressor(BaseEstimator):
    """Least-squares autoregression on the last `order` closes.

    Fit solves the normal equations directly (deterministic, no iterative
    optimizer) with a small ridge term on the lag coefficients; the
    intercept is never penalized. ridge > 0 keeps the system solvable on
    degenerate inputs such as a constant series.

    Attributes (after fit):
        coef_: lag coefficients, most recent lag first.
        intercept_: fitted constant term.
    """

    def __init__(self, order: int = 3, ridge: float = 1e-8):
        self.order = order
        self.ridge = ridge

    def fit(self, series: PriceSeries, y=None) -> "LagRegressor":
        if not isinstance(self.order, int) or self.order < 1:
            raise InvalidParam(f"order must be an integer >= 1, got {self.order!r}")
        if not math.isfinite(self.ridge) or self.ridge < 0:
            raise InvalidParam(f"ridge must be >= 0, got {self.ridge!r}")
        closes = series.closes
        if len(closes) < self.order + 2:
            raise TooShort(
                f"need at least order + 2 = {self.order + 2} points, got {len(closes)}"
            )
        design, response = _lag_design(closes, self.order)
        penalty = self.ridge * np.diag([0.0] + [1.0] * self.order)
        gram = design.T @ design + penalty
        if self.ridge == 0 and np.linalg.matrix_rank(gram) < self.order + 1:
            raise SingularSystem(
                "design matrix is rank-deficient; set ridge > 0 to regularize"
            )
        try:
            solution = np.linalg.solve(gram, design.T @ response)
        except np.linalg.LinAlgError:
            raise SingularSystem(
                "normal equations are singular; set ridge > 0 to regularize"
            )
        self.intercept_ = float(solution[0])
        self.coef_ = solution[1:].copy()
        return self

    def predict(self, series: PriceSeries) -> PredictionSet:
        """One-step-ahead predictions for points order..n-1 of the series."""
        if not hasattr(self, "coef_"):
            raise NotFittedError("LagRegressor must be fitted before predicting")
        closes = series.closes
        if len(closes) < self.order + 1:
            raise TooShort(
                f"need at least order + 1 = {self.order + 1} points, got {len(closes)}"
            )
        design, response = _lag_design(closes, self.order)
        predictions = design @ np.concatenate(([self.intercept_], self.coef_))
        return PredictionSet(
            targets=response,
            predictions=predictions,
            aligned_timestamps=series.timestamps[self.order:],
            space=PRICE,
            symbol=series.symbol,
        )


def _lag_design(closes: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix [1, p[t-1], ..., p[t-order]] and response p[t]."""
    n = len(closes)
    rows = n - order
    design = np.ones((rows, order + 1), dtype=float)
    for j in range(1, order + 1):
        design[:, j] = closes[order - j : n - j]
    return design, closes[order:].copy()
