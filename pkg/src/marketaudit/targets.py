"""Target encodings: movements split into direction and magnitude channels.

Predicting the exact next price rewards models that shadow the last known
value; splitting the movement into a sign channel and a size channel lets
the loss and the accuracy metric weight what actually matters for trading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParam, NoNonzeroMoves
from .validation import as_float_array, require_nonempty, require_same_length

ZERO_POLICIES = ("wrong", "half-credit")


@dataclass(frozen=True, slots=True)
class DirMag:
    """A movement as (direction in {-1, 0, +1}, magnitude >= 0)."""

    direction: int
    magnitude: float

    def __post_init__(self):
        if self.direction not in (-1, 0, 1):
            raise InvalidParam(f"direction must be -1, 0, or +1, got {self.direction!r}")
        if not math.isfinite(self.magnitude) or self.magnitude < 0:
            raise InvalidParam(f"magnitude must be >= 0, got {self.magnitude!r}")


@dataclass(frozen=True, slots=True)
class LossWeights:
    """Per-channel weights for the two-channel loss; direction defaults heavier."""

    w_dir: float = 2.0
    w_mag: float = 1.0

    def __post_init__(self):
        for name, w in (("w_dir", self.w_dir), ("w_mag", self.w_mag)):
            if not math.isfinite(w) or w < 0:
                raise InvalidParam(f"{name} must be >= 0, got {w!r}")
        if self.w_dir == 0 and self.w_mag == 0:
            raise InvalidParam("at least one loss weight must be positive")


def encode_dirmag(ms) -> list[DirMag]:
    """Encode a movement series as (sign, absolute size) pairs."""
    values = as_float_array(ms, "movements")
    return [DirMag(direction=int(np.sign(v)), magnitude=float(abs(v))) for v in values]


def decode_dirmag(encoded: list[DirMag]) -> np.ndarray:
    """Reconstruct the movement series: direction times magnitude."""
    return np.array([e.direction * e.magnitude for e in encoded], dtype=float)


def weighted_loss(pred: list[DirMag], truth: list[DirMag], weights: LossWeights | None = None) -> float:
    """Two-channel loss: w_dir * mean(direction error) + w_mag * mean(squared magnitude error).

    Direction error is 0/1 per step, so the first term is the misdirection
    rate; the second is the usual squared error on sizes.
    """
    if weights is None:
        weights = LossWeights()
    pred_dir = np.array([e.direction for e in pred], dtype=float)
    true_dir = np.array([e.direction for e in truth], dtype=float)
    pred_mag = np.array([e.magnitude for e in pred], dtype=float)
    true_mag = np.array([e.magnitude for e in truth], dtype=float)
    require_same_length(pred_dir, true_dir, "prediction and truth")
    require_nonempty(pred_dir, "encoded movements")
    dir_err = np.mean(pred_dir != true_dir)
    mag_err = np.mean((pred_mag - true_mag) ** 2)
    return float(weights.w_dir * dir_err + weights.w_mag * mag_err)


def directional_accuracy(pred_m, true_m, zero_policy: str = "wrong") -> float:
    """Fraction of steps whose predicted movement sign matches the true sign.

    Steps where the true movement is zero are excluded. A predicted zero on
    a moving step earns no credit under "wrong" and half under "half-credit";
    a flat forecast cannot claim directional skill by default.

    Raises:
        LengthMismatch: inputs differ in length.
        NoNonzeroMoves: every true movement is zero.
    """
    if zero_policy not in ZERO_POLICIES:
        raise InvalidParam(f"zero_policy must be one of {ZERO_POLICIES}, got {zero_policy!r}")
    pred = as_float_array(pred_m, "predicted movements")
    true = as_float_array(true_m, "true movements")
    require_same_length(pred, true, "movement series")
    moving = true != 0
    if not np.any(moving):
        raise NoNonzeroMoves("every true movement is zero")
    pred_sign = np.sign(pred[moving])
    true_sign = np.sign(true[moving])
    credit = (pred_sign == true_sign).astype(float)
    if zero_policy == "half-credit":
        credit[pred_sign == 0] = 0.5
    return float(np.mean(credit))
