"""Chronological partitioning with a persistent consumption ledger.

A system revised N times has, knowingly or not, tuned itself against N
evaluation sets; it needs N+1 before any run counts as unseen. The ledger
records partitions, revision notes, and which evaluation partitions have
already been spent, and refuses to hand out a spent one twice.
"""
from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from .audit import (
    CHECK_SUFFICIENCY,
    SECTION_DATASETS,
    SEVERITY_BLOCK,
    SEVERITY_PASS,
    Finding,
)
from .errors import (
    ExhaustedDatasets,
    InvalidParam,
    LedgerLocked,
    TooFewPoints,
)
from .market_data import PriceSeries

ROLE_TRAINING = "training"
ROLE_EVALUATION = "evaluation"


def content_digest(data: bytes) -> str:
    """Content hash used to pin a ledger to its source CSV bytes."""
    return "sha256:" + hashlib.sha256(data).hexdigest()


@dataclass(frozen=True, slots=True)
class Partition:
    """A contiguous slice of the source series; indices are [start, end)."""

    id: int
    role: str
    start_index: int
    end_index: int
    series: PriceSeries | None = None

    def __len__(self) -> int:
        return self.end_index - self.start_index


@dataclass(frozen=True, slots=True)
class AlterationNote:
    timestamp: str
    note: str


@dataclass(frozen=True, slots=True)
class SplitLedger:
    """Partitions plus the revision count and the consumed evaluation ids."""

    partitions: tuple[Partition, ...]
    alterations: int = 0
    notes: tuple[AlterationNote, ...] = ()
    consumed: frozenset[int] = frozenset()
    source_digest: str = ""

    @property
    def evaluation_ids(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.partitions if p.role == ROLE_EVALUATION)

    def record_alteration(self, note: str, timestamp: str | None = None) -> "SplitLedger":
        """Count one system revision and keep the note verbatim."""
        if timestamp is None:
            timestamp = datetime.now(timezone.utc).isoformat()
        return replace(
            self,
            alterations=self.alterations + 1,
            notes=self.notes + (AlterationNote(timestamp=timestamp, note=note),),
        )

    def next_unseen(self) -> tuple[Partition, "SplitLedger"]:
        """Hand out the lowest-id evaluation partition not yet consumed.

        Raises ExhaustedDatasets, leaving the ledger unchanged, when every
        evaluation partition has been spent.
        """
        for p in self.partitions:
            if p.role == ROLE_EVALUATION and p.id not in self.consumed:
                return p, replace(self, consumed=self.consumed | {p.id})
        required = self.alterations + 1
        available = len(self.evaluation_ids)
        raise ExhaustedDatasets(
            f"no unseen evaluation data left: the system was altered "
            f"{self.alterations} times and needs {required} unseen evaluation "
            f"sets, but all {available} evaluation partitions are consumed; "
            f"short by {max(required - available, 1)} new unseen set(s)"
        )

    def check_sufficiency(self) -> Finding:
        """Pass only if enough evaluation partitions exist and one is still unseen."""
        required = self.alterations + 1
        available = len(self.evaluation_ids)
        remaining = available - len(self.consumed)
        metrics = {
            "required": required,
            "available": available,
            "consumed": len(self.consumed),
        }
        if available < required:
            return Finding(
                check_id=CHECK_SUFFICIENCY,
                severity=SEVERITY_BLOCK,
                metrics=metrics,
                message=(
                    f"altered {self.alterations} times but only {available} "
                    f"evaluation partitions exist; need {required}"
                ),
                paper_section=SECTION_DATASETS,
            )
        if remaining == 0:
            return Finding(
                check_id=CHECK_SUFFICIENCY,
                severity=SEVERITY_BLOCK,
                metrics=metrics,
                message=(
                    f"all {available} evaluation partitions already consumed; "
                    "no unseen data remains for a final run"
                ),
                paper_section=SECTION_DATASETS,
            )
        return Finding(
            check_id=CHECK_SUFFICIENCY,
            severity=SEVERITY_PASS,
            metrics=metrics,
            message=(
                f"{available} evaluation partitions cover {self.alterations} "
                f"alterations (need {required}); {remaining} still unseen"
            ),
            paper_section=SECTION_DATASETS,
        )


def partition(series: PriceSeries, k: int) -> list[Partition]:
    """Split into k contiguous chronological slices.

    The first slice is the training partition and absorbs the remainder
    (extra training data is benign; evaluation sets stay comparable);
    the rest form the evaluation pool.
    """
    if not isinstance(k, int) or k < 2:
        raise InvalidParam(f"k must be an integer >= 2, got {k!r}")
    n = len(series)
    if n < k:
        raise TooFewPoints(f"cannot split {n} points into {k} partitions")
    base = n // k
    lengths = [base + n % k] + [base] * (k - 1)
    partitions = []
    start = 0
    for i, length in enumerate(lengths):
        end = start + length
        partitions.append(
            Partition(
                id=i,
                role=ROLE_TRAINING if i == 0 else ROLE_EVALUATION,
                start_index=start,
                end_index=end,
                series=series.slice(start, end),
            )
        )
        start = end
    return partitions


def make_ledger(series: PriceSeries, k: int, source_digest: str = "") -> SplitLedger:
    return SplitLedger(
        partitions=tuple(partition(series, k)),
        source_digest=source_digest,
    )


def save_ledger(ledger: SplitLedger, path: str) -> None:
    """Write the ledger JSON atomically (temp file, then rename)."""
    document = {
        "partitions": [
            {
                "id": p.id,
                "role": p.role,
                "start_index": p.start_index,
                "end_index": p.end_index,
                "source_digest": ledger.source_digest,
            }
            for p in ledger.partitions
        ],
        "alterations": {
            "count": ledger.alterations,
            "notes": [{"timestamp": n.timestamp, "note": n.note} for n in ledger.notes],
        },
        "consumed": sorted(ledger.consumed),
    }
    tmp_path = f"{path}.tmp.{os.getpid()}"
    with open(tmp_path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp_path, path)


def load_ledger(path: str) -> SplitLedger:
    """Read a ledger JSON back; partitions come back without their series."""
    with open(path, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    try:
        rows = document["partitions"]
        alterations = document["alterations"]["count"]
        raw_notes = document["alterations"]["notes"]
        consumed = document["consumed"]
    except (KeyError, TypeError) as err:
        raise InvalidParam(f"{path} is not a ledger file: missing {err}")
    digests = {row.get("source_digest", "") for row in rows}
    if len(digests) > 1:
        raise InvalidParam(f"{path} mixes partitions from different sources")
    partitions = tuple(
        Partition(
            id=int(row["id"]),
            role=str(row["role"]),
            start_index=int(row["start_index"]),
            end_index=int(row["end_index"]),
        )
        for row in rows
    )
    notes = tuple(
        AlterationNote(timestamp=str(n["timestamp"]), note=str(n["note"])) for n in raw_notes
    )
    return SplitLedger(
        partitions=partitions,
        alterations=int(alterations),
        notes=notes,
        consumed=frozenset(int(i) for i in consumed),
        source_digest=next(iter(digests), ""),
    )


@contextmanager
def ledger_lock(path: str):
    """Exclusive writer lock for the ledger file at `path`.

    Creation of `<path>.lock` is the lock; a second writer fails fast with
    LedgerLocked instead of corrupting the ledger.
    """
    lock_path = f"{path}.lock"
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LedgerLocked(
            f"{path} is locked by another writer (remove {lock_path} if stale)"
        )
    try:
        yield
    finally:
        os.close(fd)
        os.unlink(lock_path)
