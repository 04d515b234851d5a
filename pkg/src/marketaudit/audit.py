"""The detector battery: metrics and checks that catch the classic ways a
market predictor looks better than it is, aggregated into an AuditReport.

Checks: target range (unscaled levels), error-to-fluctuation ratio (tiny
percentage error can still dwarf the daily move), mimicry (predictions that
shadow yesterday's truth), skill versus the persistence baseline,
directional accuracy (coin-flip detection), and dataset sufficiency from
the split ledger.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import (
    DegenerateBaseline,
    InvalidParam,
    MarketAuditError,
    TooShort,
    ZeroFluctuation,
)
from .models import MOVEMENT, PRICE, PredictionSet
from .targets import directional_accuracy
from .validation import as_float_array, require_nonempty, require_same_length

if TYPE_CHECKING:
    from .ledger import SplitLedger

SEVERITY_PASS = "pass"
SEVERITY_WARN = "warn"
SEVERITY_BLOCK = "block"

CHECK_RANGE = "range"
CHECK_ETF = "error_to_fluctuation"
CHECK_MIMICRY = "mimicry"
CHECK_SKILL = "skill"
CHECK_DA = "directional_accuracy"
CHECK_SUFFICIENCY = "sufficiency"
CHECK_INPUT_ERROR = "input-error"

# Report-section tags attached to findings so a reader can trace each check
# to the background write-up it implements.
SECTION_DATASETS = "§III"
SECTION_SCALING = "§IV"
SECTION_MIMICRY = "§V"
SECTION_TARGETS = "§VI"
SECTION_SIMULATION = "§VII"

# Guards every ratio denominator; degenerate inputs raise typed errors
# instead of returning NaN, this only absorbs rounding at the boundary.
EPS = 1e-12


@dataclass(frozen=True, slots=True)
class Finding:
    """One check's verdict: id, severity, numeric evidence, and message."""

    check_id: str
    severity: str
    metrics: dict
    message: str
    paper_section: str

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "severity": self.severity,
            "metrics": dict(self.metrics),
            "message": self.message,
            "paper_section": self.paper_section,
        }


@dataclass(frozen=True, slots=True)
class AuditConfig:
    """Thresholds for the detector battery; defaults are the audit defaults."""

    etf_block: float = 1.0
    etf_warn: float = 0.5
    mimicry_block: float = 1.0 / 3.0
    skill_warn: float = 0.05
    da_band: float = 0.05
    range_bound: float = 1.5

    def __post_init__(self):
        for name in ("etf_block", "etf_warn", "mimicry_block", "skill_warn", "da_band", "range_bound"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidParam(f"{name} must be >= 0, got {value!r}")
        if self.etf_warn > self.etf_block:
            raise InvalidParam("etf_warn must not exceed etf_block")
        if self.da_band > 0.5:
            raise InvalidParam("da_band above 0.5 would flag every accuracy")


@dataclass(frozen=True, slots=True)
class AuditReport:
    """All findings from one run plus the thresholds and input hashes used."""

    findings: tuple[Finding, ...]
    config_echo: dict
    input_digests: dict

    def blockers(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == SEVERITY_BLOCK)


def rmse(pred, truth) -> float:
    """Root mean squared error between two equal-length sequences."""
    p = as_float_array(pred, "predictions")
    t = as_float_array(truth, "targets")
    require_same_length(p, t, "predictions and targets")
    require_nonempty(p, "predictions")
    return float(np.sqrt(np.mean((p - t) ** 2)))


def mimicry_score(ps: PredictionSet) -> float:
    """How much better the predictions fit yesterday's truth than today's.

    r0 = RMSE against the aligned targets, r1 = RMSE against the targets
    shifted back one step, both over the overlapping range; the score is
    (r0 - r1) / (r0 + r1 + EPS). +1 means the model is a pure lag copy,
    -1 means it fits today's truth perfectly, 0 means no preference.
    """
    _require_space(ps, (PRICE,), "mimicry_score")
    if len(ps) < 3:
        raise TooShort(f"mimicry needs at least 3 pairs, got {len(ps)}")
    r0 = rmse(ps.predictions[1:], ps.targets[1:])
    r1 = rmse(ps.predictions[1:], ps.targets[:-1])
    return float((r0 - r1) / (r0 + r1 + EPS))


def skill_score(ps: PredictionSet) -> float:
    """1 - RMSE(model) / RMSE(persistence) over the same range.

    0 means no better than predicting yesterday's price; 1 means perfect;
    negative means worse than the trivial baseline.
    """
    _require_space(ps, (PRICE,), "skill_score")
    if len(ps) < 2:
        raise TooShort(f"skill needs at least 2 pairs, got {len(ps)}")
    model_rmse = rmse(ps.predictions[1:], ps.targets[1:])
    baseline_rmse = rmse(ps.targets[:-1], ps.targets[1:])
    if baseline_rmse == 0:
        raise DegenerateBaseline("persistence RMSE is zero on a constant series")
    return float(1.0 - model_rmse / baseline_rmse)


def error_to_fluctuation(ps: PredictionSet) -> float:
    """RMSE divided by the mean absolute one-step target movement.

    Above 1 the typical error exceeds the very move the model is supposed
    to predict, however small the error looks in relative terms.
    """
    if len(ps) < 2:
        raise TooShort(f"error_to_fluctuation needs at least 2 pairs, got {len(ps)}")
    fluctuation = float(np.mean(np.abs(np.diff(ps.targets))))
    if fluctuation == 0:
        raise ZeroFluctuation("targets never move")
    return rmse(ps.predictions, ps.targets) / fluctuation


def range_audit(targets, bound: float = 1.5) -> Finding:
    """Block when any |target| exceeds the bound.

    Training a bounded-output model against raw price levels is the classic
    scaling mistake; levels inside [-bound, bound] pass.
    """
    values = require_nonempty(as_float_array(targets, "targets"), "targets")
    lo = float(np.min(values))
    hi = float(np.max(values))
    metrics = {"min": lo, "max": hi, "bound": float(bound)}
    if max(abs(lo), abs(hi)) <= bound:
        return Finding(
            check_id=CHECK_RANGE,
            severity=SEVERITY_PASS,
            metrics=metrics,
            message=f"targets lie in [{lo:.6g}, {hi:.6g}], within +/-{bound:g}",
            paper_section=SECTION_SCALING,
        )
    return Finding(
        check_id=CHECK_RANGE,
        severity=SEVERITY_BLOCK,
        metrics=metrics,
        message=(
            f"targets span [{lo:.6g}, {hi:.6g}], outside +/-{bound:g}: "
            "scale the targets before training"
        ),
        paper_section=SECTION_SCALING,
    )


def run_audit(
    ps: PredictionSet,
    ledger: "SplitLedger | None" = None,
    cfg: AuditConfig | None = None,
    input_digests: dict | None = None,
) -> AuditReport:
    """Run every enabled check and aggregate exactly one finding per check.

    Checks that do not apply to the prediction set's space, or that have no
    ledger to inspect, contribute a pass finding annotated as skipped; a
    check whose preconditions fail contributes a block finding with
    check_id "input-error". Findings keep a fixed order, so two runs over
    the same inputs render identically.
    """
    if cfg is None:
        cfg = AuditConfig()
    findings = [
        _range_finding(ps, cfg),
        _etf_finding(ps, cfg),
        _mimicry_finding(ps, cfg),
        _skill_finding(ps, cfg),
        _da_finding(ps, cfg),
        _sufficiency_finding(ledger),
    ]
    return AuditReport(
        findings=tuple(findings),
        config_echo=asdict(cfg),
        input_digests=dict(input_digests or {}),
    )


def _skipped(check_id: str, section: str, reason: str) -> Finding:
    return Finding(
        check_id=check_id,
        severity=SEVERITY_PASS,
        metrics={"skipped": 1.0},
        message=f"skipped: {reason}",
        paper_section=section,
    )


def _input_error(check_name: str, section: str, err: MarketAuditError) -> Finding:
    return Finding(
        check_id=CHECK_INPUT_ERROR,
        severity=SEVERITY_BLOCK,
        metrics={},
        message=f"{check_name}: {err}",
        paper_section=section,
    )


def _range_finding(ps: PredictionSet, cfg: AuditConfig) -> Finding:
    if ps.space == MOVEMENT:
        # Movements are differences; the level-magnitude check would flag
        # any lively series while detecting nothing about scaling.
        return _skipped(CHECK_RANGE, SECTION_SCALING, "level check does not apply to movement targets")
    try:
        return range_audit(ps.targets, cfg.range_bound)
    except MarketAuditError as err:
        return _input_error(CHECK_RANGE, SECTION_SCALING, err)


def _etf_finding(ps: PredictionSet, cfg: AuditConfig) -> Finding:
    try:
        ratio = error_to_fluctuation(ps)
    except MarketAuditError as err:
        return _input_error(CHECK_ETF, SECTION_SCALING, err)
    metrics = {
        "ratio": ratio,
        "rmse": rmse(ps.predictions, ps.targets),
        "mean_abs_move": float(np.mean(np.abs(np.diff(ps.targets)))),
    }
    if ratio > cfg.etf_block:
        severity = SEVERITY_BLOCK
        verdict = f"error is {ratio:.4g}x the mean move: predictions are unusable"
    elif ratio > cfg.etf_warn:
        severity = SEVERITY_WARN
        verdict = f"error is {ratio:.4g}x the mean move"
    else:
        severity = SEVERITY_PASS
        verdict = f"error is {ratio:.4g}x the mean move"
    return Finding(
        check_id=CHECK_ETF,
        severity=severity,
        metrics=metrics,
        message=verdict,
        paper_section=SECTION_SCALING,
    )


def _mimicry_finding(ps: PredictionSet, cfg: AuditConfig) -> Finding:
    if ps.space != PRICE:
        return _skipped(CHECK_MIMICRY, SECTION_MIMICRY, "requires price-space predictions")
    try:
        score = mimicry_score(ps)
    except MarketAuditError as err:
        return _input_error(CHECK_MIMICRY, SECTION_MIMICRY, err)
    metrics = {"score": score}
    if score > cfg.mimicry_block:
        return Finding(
            check_id=CHECK_MIMICRY,
            severity=SEVERITY_BLOCK,
            metrics=metrics,
            message=(
                f"mimicry score {score:.4f}: predictions track yesterday's price, "
                "not tomorrow's"
            ),
            paper_section=SECTION_MIMICRY,
        )
    return Finding(
        check_id=CHECK_MIMICRY,
        severity=SEVERITY_PASS,
        metrics=metrics,
        message=f"mimicry score {score:.4f}",
        paper_section=SECTION_MIMICRY,
    )


def _skill_finding(ps: PredictionSet, cfg: AuditConfig) -> Finding:
    if ps.space != PRICE:
        return _skipped(CHECK_SKILL, SECTION_MIMICRY, "requires price-space predictions")
    try:
        skill = skill_score(ps)
    except MarketAuditError as err:
        return _input_error(CHECK_SKILL, SECTION_MIMICRY, err)
    metrics = {"skill": skill}
    if abs(skill) < cfg.skill_warn:
        return Finding(
            check_id=CHECK_SKILL,
            severity=SEVERITY_WARN,
            metrics=metrics,
            message=(
                f"skill {skill:.4f}: indistinguishable from predicting "
                "yesterday's price"
            ),
            paper_section=SECTION_MIMICRY,
        )
    return Finding(
        check_id=CHECK_SKILL,
        severity=SEVERITY_PASS,
        metrics=metrics,
        message=f"skill {skill:.4f} versus the persistence baseline",
        paper_section=SECTION_MIMICRY,
    )


def derived_movements(ps: PredictionSet) -> tuple[np.ndarray, np.ndarray]:
    """(predicted, true) movements implied by a prediction set.

    Movement-space sets carry them directly. For level spaces the true move
    is the target difference and the predicted move is measured from the
    last known target, the only anchor a one-step forecaster has.
    """
    if ps.space == MOVEMENT:
        return ps.predictions.copy(), ps.targets.copy()
    if len(ps) < 2:
        raise TooShort("need at least 2 pairs to derive movements from levels")
    true_m = np.diff(ps.targets)
    pred_m = ps.predictions[1:] - ps.targets[:-1]
    return pred_m, true_m


def _da_finding(ps: PredictionSet, cfg: AuditConfig) -> Finding:
    try:
        pred_m, true_m = derived_movements(ps)
        accuracy = directional_accuracy(pred_m, true_m)
    except MarketAuditError as err:
        return _input_error(CHECK_DA, SECTION_TARGETS, err)
    n_moving = int(np.count_nonzero(true_m))
    metrics = {"directional_accuracy": accuracy, "n_moving_steps": n_moving}
    if abs(accuracy - 0.5) <= cfg.da_band:
        return Finding(
            check_id=CHECK_DA,
            severity=SEVERITY_WARN,
            metrics=metrics,
            message=(
                f"directional accuracy {accuracy:.4f} over {n_moving} moving steps: "
                "indistinguishable from coin flipping"
            ),
            paper_section=SECTION_TARGETS,
        )
    return Finding(
        check_id=CHECK_DA,
        severity=SEVERITY_PASS,
        metrics=metrics,
        message=f"directional accuracy {accuracy:.4f} over {n_moving} moving steps",
        paper_section=SECTION_TARGETS,
    )


def _sufficiency_finding(ledger: "SplitLedger | None") -> Finding:
    if ledger is None:
        return _skipped(CHECK_SUFFICIENCY, SECTION_DATASETS, "no ledger provided")
    return ledger.check_sufficiency()


def _require_space(ps: PredictionSet, allowed: tuple[str, ...], op: str) -> None:
    if ps.space not in allowed:
        raise InvalidParam(f"{op} requires space in {allowed}, got {ps.space!r}")
