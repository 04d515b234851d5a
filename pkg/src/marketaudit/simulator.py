"""Trading simulator: the measure of performance that error curves are not.

Positions are restricted to {-1, 0, +1} times a fixed unit, filled at the
close with proportional and per-unit transaction costs. A model that only
shadows yesterday's price looks superb on an error plot and loses money
here once friction exists, which is the point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInput,
    InvalidParam,
    LengthMismatch,
    NonPositiveEquity,
    TooShort,
)
from .market_data import PriceSeries
from .models import MOVEMENT, PRICE, PredictionSet

# 5 basis points proportional, nothing per unit: small, but enough that a
# zero-edge signal churns itself into a loss.
DEFAULT_PROPORTIONAL_COST = 0.0005


@dataclass(frozen=True, slots=True)
class CostModel:
    """Transaction costs: a flat charge per unit plus a fraction of notional."""

    per_unit: float = 0.0
    proportional: float = DEFAULT_PROPORTIONAL_COST

    def __post_init__(self):
        for name, value in (("per_unit", self.per_unit), ("proportional", self.proportional)):
            if not math.isfinite(value) or value < 0:
                raise InvalidParam(f"{name} must be >= 0, got {value!r}")

    def charge(self, units_traded: int, price: float) -> float:
        return units_traded * (self.per_unit + self.proportional * price)


@dataclass(frozen=True, slots=True)
class TradeStep:
    timestamp: str
    position_before: int
    position_after: int
    price: float
    pnl: float
    cost: float


@dataclass(frozen=True, slots=True)
class TradeLog:
    steps: tuple[TradeStep, ...]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True, slots=True)
class EquityCurve:
    """Account value per step; equity[0] is the initial capital."""

    initial: float
    equity: tuple[float, ...]

    def __post_init__(self):
        if not math.isfinite(self.initial) or self.initial <= 0:
            raise InvalidParam(f"initial equity must be > 0, got {self.initial!r}")
        if not self.equity or self.equity[0] != self.initial:
            raise InvalidParam("equity curve must start at the initial capital")

    @property
    def last(self) -> float:
        return self.equity[-1]


def signals_from_predictions(ps: PredictionSet) -> list[int]:
    """Turn a prediction set into {-1, 0, +1} position signals.

    Movement space: the sign of each predicted movement. Price space: the
    sign of the predicted move from the last known target, which drops the
    first pair since it has no prior price to trade against.
    """
    if ps.space == MOVEMENT:
        return [int(np.sign(p)) for p in ps.predictions]
    if ps.space == PRICE:
        if len(ps) < 2:
            raise TooShort("price-space signals need at least 2 pairs")
        moves = ps.predictions[1:] - ps.targets[:-1]
        return [int(np.sign(m)) for m in moves]
    raise InvalidParam(f"signals need price or movement space, got {ps.space!r}")


def simulate(
    signals,
    prices: PriceSeries,
    cost: CostModel | None = None,
    initial: float = 10_000.0,
    unit: int = 1,
) -> tuple[TradeLog, EquityCurve]:
    """Trade the signals over the price path.

    At close t the position becomes signals[t] * unit; the step's P&L is
    the position times the move into t+1; costs are charged on the units
    traded at the fill price. Any final open position is force-closed at
    the last price so the total return is fully realized.

    Requires len(signals) == len(prices) - 1.
    """
    if cost is None:
        cost = CostModel()
    closes = prices.closes
    timestamps = prices.timestamps
    signals = list(signals)
    if len(signals) != len(closes) - 1:
        raise LengthMismatch(
            f"need one signal per step: {len(signals)} signals for {len(closes)} prices"
        )
    if not math.isfinite(initial) or initial <= 0:
        raise InvalidParam(f"initial must be > 0, got {initial!r}")
    if not isinstance(unit, int) or unit < 1:
        raise InvalidParam(f"unit must be an integer >= 1, got {unit!r}")
    for s in signals:
        if s not in (-1, 0, 1):
            raise InvalidParam(f"signals must be -1, 0, or +1, got {s!r}")

    steps: list[TradeStep] = []
    equity = [float(initial)]
    position = 0
    for t, signal in enumerate(signals):
        new_position = signal * unit
        traded = abs(new_position - position)
        fill_cost = cost.charge(traded, closes[t]) if traded else 0.0
        pnl = new_position * (closes[t + 1] - closes[t])
        equity.append(equity[-1] + pnl - fill_cost)
        steps.append(
            TradeStep(
                timestamp=timestamps[t],
                position_before=position,
                position_after=new_position,
                price=float(closes[t]),
                pnl=float(pnl),
                cost=float(fill_cost),
            )
        )
        position = new_position
    if position != 0:
        fill_cost = cost.charge(abs(position), closes[-1])
        equity.append(equity[-1] - fill_cost)
        steps.append(
            TradeStep(
                timestamp=timestamps[-1],
                position_before=position,
                position_after=0,
                price=float(closes[-1]),
                pnl=0.0,
                cost=float(fill_cost),
            )
        )
    return TradeLog(steps=tuple(steps)), EquityCurve(initial=float(initial), equity=tuple(equity))


def max_drawdown(curve) -> float:
    """Largest peak-to-trough fractional decline; 0 for a nondecreasing curve."""
    values = np.asarray(getattr(curve, "equity", curve), dtype=float)
    if values.size == 0:
        raise EmptyInput("equity curve is empty")
    if np.any(values <= 0):
        raise NonPositiveEquity("equity curve touches zero or below")
    peaks = np.maximum.accumulate(values)
    return float(np.max((peaks - values) / peaks))


def summary_metrics(log: TradeLog, curve: EquityCurve) -> dict:
    """Headline numbers for the report's `simulation` block.

    hit_rate is wins over decided steps, counted only while holding a
    position; with no such steps it is None (reported as absent).
    """
    wins = 0
    losses = 0
    changes = 0
    total_costs = 0.0
    for step in log.steps:
        if step.position_after != step.position_before:
            changes += 1
        total_costs += step.cost
        if step.position_after != 0:
            if step.pnl > 0:
                wins += 1
            elif step.pnl < 0:
                losses += 1
    decided = wins + losses
    return {
        "total_return": curve.last / curve.initial - 1.0,
        "hit_rate": (wins / decided) if decided else None,
        "max_drawdown": max_drawdown(curve),
        "total_costs": total_costs,
        "n_position_changes": changes,
    }


def write_trade_log_csv(log: TradeLog, curve: EquityCurve) -> str:
    """Per-step CSV: timestamp, position, price, pnl, cost, equity."""
    lines = ["timestamp,position,price,pnl,cost,equity"]
    for step, equity in zip(log.steps, curve.equity[1:]):
        lines.append(
            f"{step.timestamp},{step.position_after},{float(step.price)!r},"
            f"{float(step.pnl)!r},{float(step.cost)!r},{float(equity)!r}"
        )
    return "\n".join(lines) + "\n"
