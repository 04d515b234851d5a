"""marketaudit: audit harness for market-prediction models.

Detects the classic ways a predictor looks better than it is (leaked
lag-copies, unscaled targets, coin-flip direction calls, burned-through
evaluation data) and replaces error-curve evaluation with a trading
simulation under transaction costs.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .audit import (
    AuditConfig,
    AuditReport,
    Finding,
    derived_movements,
    error_to_fluctuation,
    mimicry_score,
    range_audit,
    rmse,
    run_audit,
    skill_score,
)
from .config import RunConfig, config_dict, default_config, load_config, parse_config
from .errors import MarketAuditError
from .ledger import (
    Partition,
    SplitLedger,
    content_digest,
    ledger_lock,
    load_ledger,
    make_ledger,
    partition,
    save_ledger,
)
from .market_data import (
    PRICE_FLOOR,
    PricePoint,
    PriceSeries,
    gen_random_walk,
    gen_trend_sine,
    movements,
    parse_price_csv,
    write_price_csv,
)
from .models import (
    MOVEMENT,
    PRICE,
    SCALED,
    SPACES,
    LagRegressor,
    PersistenceModel,
    PredictionSet,
    read_prediction_csv,
    write_prediction_csv,
)
from .scaling import DivisorScaler
from .simulator import (
    CostModel,
    EquityCurve,
    TradeLog,
    TradeStep,
    max_drawdown,
    signals_from_predictions,
    simulate,
    summary_metrics,
    write_trade_log_csv,
)
from .targets import (
    DirMag,
    LossWeights,
    decode_dirmag,
    directional_accuracy,
    encode_dirmag,
    weighted_loss,
)

__all__ = [
    "__version__",
    "AuditConfig",
    "AuditReport",
    "CostModel",
    "DirMag",
    "DivisorScaler",
    "EquityCurve",
    "Finding",
    "LagRegressor",
    "LossWeights",
    "MarketAuditError",
    "MOVEMENT",
    "PRICE",
    "PRICE_FLOOR",
    "Partition",
    "PersistenceModel",
    "PricePoint",
    "PriceSeries",
    "PredictionSet",
    "RunConfig",
    "SCALED",
    "SPACES",
    "SplitLedger",
    "TradeLog",
    "TradeStep",
    "config_dict",
    "content_digest",
    "decode_dirmag",
    "default_config",
    "derived_movements",
    "directional_accuracy",
    "encode_dirmag",
    "error_to_fluctuation",
    "gen_random_walk",
    "gen_trend_sine",
    "ledger_lock",
    "load_config",
    "load_ledger",
    "make_ledger",
    "max_drawdown",
    "mimicry_score",
    "movements",
    "parse_config",
    "parse_price_csv",
    "partition",
    "range_audit",
    "read_prediction_csv",
    "rmse",
    "run_audit",
    "save_ledger",
    "signals_from_predictions",
    "simulate",
    "skill_score",
    "summary_metrics",
    "weighted_loss",
    "write_prediction_csv",
    "write_price_csv",
    "write_trade_log_csv",
]
