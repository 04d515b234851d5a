"""Price-series parsing, validation, movements, and seeded synthetic generators.

Timestamps are either bare integers (epoch days, row indices) or ISO-8601
dates; a series must use one kind throughout. They are stored as the raw
strings and only parsed for ordering, so round-tripping preserves bytes.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import (
    DuplicateTimestamp,
    EmptyInput,
    InvalidParam,
    MalformedRow,
    NonMonotonicTimestamp,
    NonPositivePrice,
)

# Generators clamp here so the strictly-positive-close invariant holds for
# every seed.
PRICE_FLOOR = 0.01

# All synthetic data comes from this one bit generator so that a (seed,
# params) pair identifies the series exactly, on any platform and build.
SEED_BIT_GENERATOR = np.random.SFC64


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(SEED_BIT_GENERATOR(seed))


def timestamp_key(raw: str):
    """Parse a timestamp string into an orderable key.

    Returns an int for bare integers, a date for ISO-8601 strings.
    Raises ValueError otherwise.
    """
    text = raw.strip()
    try:
        return int(text)
    except ValueError:
        return date.fromisoformat(text)


def validate_timestamps(timestamps: tuple[str, ...]) -> None:
    """Require parseable, uniform-kind, strictly increasing timestamps."""
    prev_key = None
    kind = None
    for raw in timestamps:
        try:
            key = timestamp_key(raw)
        except ValueError:
            raise InvalidParam(f"unparseable timestamp {raw!r}")
        if kind is None:
            kind = type(key)
        elif type(key) is not kind:
            raise InvalidParam(
                f"mixed timestamp kinds: {raw!r} vs earlier {kind.__name__} values"
            )
        if prev_key is not None:
            if key == prev_key:
                raise InvalidParam(f"duplicate timestamp {raw!r}")
            if key < prev_key:
                raise InvalidParam(f"timestamp {raw!r} out of order")
        prev_key = key


@dataclass(frozen=True, slots=True)
class PricePoint:
    """One observation: a timestamp and a strictly positive close."""

    timestamp: str
    close: float


@dataclass(frozen=True, slots=True)
class PriceSeries:
    """Ordered price points with strictly increasing timestamps."""

    points: tuple[PricePoint, ...]
    symbol: str = ""

    def __post_init__(self):
        for p in self.points:
            if not math.isfinite(p.close) or p.close <= 0:
                raise InvalidParam(f"close {p.close!r} at {p.timestamp!r} not positive")
        validate_timestamps(self.timestamps)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def timestamps(self) -> tuple[str, ...]:
        return tuple(p.timestamp for p in self.points)

    @property
    def closes(self) -> np.ndarray:
        return np.array([p.close for p in self.points], dtype=float)

    def slice(self, start: int, end: int) -> "PriceSeries":
        """Contiguous sub-series over [start, end)."""
        return PriceSeries(points=self.points[start:end], symbol=self.symbol)

    @classmethod
    def from_closes(
        cls,
        closes,
        timestamps: tuple[str, ...] | None = None,
        symbol: str = "",
    ) -> "PriceSeries":
        closes = np.asarray(closes, dtype=float)
        if timestamps is None:
            timestamps = tuple(str(i) for i in range(len(closes)))
        if len(timestamps) != len(closes):
            raise InvalidParam("timestamps and closes differ in length")
        points = tuple(
            PricePoint(timestamp=t, close=float(c)) for t, c in zip(timestamps, closes)
        )
        return cls(points=points, symbol=symbol)


def movements(series: PriceSeries) -> np.ndarray:
    """Step-by-step price differences.

    Element i is close[i+1] - close[i], the move into point i+1. A series
    of length <= 1 yields an empty array.
    """
    closes = series.closes
    if len(closes) <= 1:
        return np.empty(0, dtype=float)
    return np.diff(closes)


def _split_header(row: list[str]) -> tuple[int, int]:
    """Locate the timestamp and close columns; extra columns are ignored."""
    names = [c.strip().lower() for c in row]
    try:
        return names.index("timestamp"), names.index("close")
    except ValueError:
        raise MalformedRow(1, f"header must name timestamp and close, got {row!r}")


def parse_price_csv(text: str, symbol: str = "") -> PriceSeries:
    """Parse CSV with a `timestamp,close` header into a validated PriceSeries.

    Raises:
        EmptyInput: no header or no data rows.
        MalformedRow: unparseable row, timestamp, or number.
        NonPositivePrice: close <= 0 or not finite.
        NonMonotonicTimestamp / DuplicateTimestamp: ordering violations.
    """
    reader = csv.reader(io.StringIO(text))
    header = None
    for row in reader:
        if row:
            header = row
            break
    if header is None:
        raise EmptyInput("no CSV content")
    ts_col, close_col = _split_header(header)

    points: list[PricePoint] = []
    prev_key = None
    kind = None
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) <= max(ts_col, close_col):
            raise MalformedRow(line, f"expected at least {max(ts_col, close_col) + 1} columns")
        raw_ts = row[ts_col].strip()
        raw_close = row[close_col].strip()
        try:
            key = timestamp_key(raw_ts)
        except ValueError:
            raise MalformedRow(line, f"unparseable timestamp {raw_ts!r}")
        if kind is None:
            kind = type(key)
        elif type(key) is not kind:
            raise MalformedRow(line, f"timestamp {raw_ts!r} mixes kinds within one series")
        try:
            close = float(raw_close)
        except ValueError:
            raise MalformedRow(line, f"unparseable close {raw_close!r}")
        if not math.isfinite(close):
            raise NonPositivePrice(line, f"close {raw_close!r} is not finite")
        if close <= 0:
            raise NonPositivePrice(line, f"close {close!r} must be > 0")
        if prev_key is not None:
            if key == prev_key:
                raise DuplicateTimestamp(line, f"timestamp {raw_ts!r} repeats")
            if key < prev_key:
                raise NonMonotonicTimestamp(line, f"timestamp {raw_ts!r} decreases")
        prev_key = key
        points.append(PricePoint(timestamp=raw_ts, close=close))

    if not points:
        raise EmptyInput("no data rows")
    return PriceSeries(points=tuple(points), symbol=symbol)


def write_price_csv(series: PriceSeries) -> str:
    """Serialize so that parse(write(s)) reproduces s exactly."""
    lines = ["timestamp,close"]
    for p in series.points:
        lines.append(f"{p.timestamp},{float(p.close)!r}")
    return "\n".join(lines) + "\n"


def gen_random_walk(
    seed: int,
    n: int,
    start: float = 100.0,
    sigma: float = 1.0,
    symbol: str = "synthetic",
) -> PriceSeries:
    """Seeded Gaussian random walk, floored at PRICE_FLOOR.

    p[0] = start; p[t] = max(p[t-1] + sigma * z[t], PRICE_FLOOR) with z
    standard normal. Identical (seed, params) give a bit-identical series.
    """
    _check_gen_params(n=n, start=start)
    if sigma < 0 or not math.isfinite(sigma):
        raise InvalidParam(f"sigma must be >= 0, got {sigma!r}")
    z = _rng(seed).standard_normal(n - 1) if n > 1 else np.empty(0)
    closes = np.empty(n, dtype=float)
    closes[0] = start
    for t in range(1, n):
        closes[t] = max(closes[t - 1] + sigma * z[t - 1], PRICE_FLOOR)
    return PriceSeries.from_closes(closes, symbol=symbol)


def gen_trend_sine(
    seed: int,
    n: int,
    start: float = 100.0,
    drift: float = 0.0,
    amplitude: float = 0.0,
    period: float = 20,
    noise_sigma: float = 0.0,
    symbol: str = "synthetic",
) -> PriceSeries:
    """Deterministic trend plus sinusoid plus optional Gaussian noise.

    p[t] = start + drift*t + amplitude*sin(2*pi*t/period) + noise_sigma*z[t],
    clipped to stay positive. With noise_sigma = 0 the series is an exact
    function of the parameters; direction is genuinely learnable, unlike on
    a random walk.
    """
    _check_gen_params(n=n, start=start)
    if period < 2 or not math.isfinite(period):
        raise InvalidParam(f"period must be >= 2 steps, got {period!r}")
    if noise_sigma < 0 or not math.isfinite(noise_sigma):
        raise InvalidParam(f"noise_sigma must be >= 0, got {noise_sigma!r}")
    for name, value in (("drift", drift), ("amplitude", amplitude)):
        if not math.isfinite(value):
            raise InvalidParam(f"{name} must be finite, got {value!r}")
    z = _rng(seed).standard_normal(n)
    closes = np.empty(n, dtype=float)
    for t in range(n):
        level = start + drift * t + amplitude * math.sin(2.0 * math.pi * t / period)
        closes[t] = max(level + noise_sigma * z[t], PRICE_FLOOR)
    return PriceSeries.from_closes(closes, symbol=symbol)


def _check_gen_params(n: int, start: float) -> None:
    if not isinstance(n, int) or n < 1:
        raise InvalidParam(f"n must be an integer >= 1, got {n!r}")
    if not math.isfinite(start) or start <= 0:
        raise InvalidParam(f"start must be > 0, got {start!r}")
