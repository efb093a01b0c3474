"""Percentile bucketing of predicted success and per-arm variant selection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .bank import Level, Question
from .seeding import unit_interval


class AssignmentError(ValueError):
    pass


class ExperimentGroup(Enum):
    EXPECTED = "expected"
    NON_EXPECTED = "non_expected"
    CONTROL = "control"

    @classmethod
    def parse(cls, raw: str) -> "ExperimentGroup":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise AssignmentError(f"unknown experiment group {raw!r}") from None


GROUPS = (ExperimentGroup.EXPECTED, ExperimentGroup.NON_EXPECTED, ExperimentGroup.CONTROL)

# Approximates the original experiment's arm sizes (190/139/141 of ~470).
DEFAULT_ARM_SPLIT = (0.40, 0.30, 0.30)


@dataclass(frozen=True)
class PercentileTable:
    """Population thresholds at the 33rd and 66th nearest-rank percentiles.

    sorted_predictions is kept when the table is built in-process and dropped
    when the table is loaded from its file form.
    """

    p33: float
    p66: float
    n: int
    source_model_hash: str | None = None
    sorted_predictions: tuple[float, ...] | None = None


def nearest_rank(n: int, fraction: float) -> int:
    """1-indexed ascending rank ceil(fraction * n)."""
    return max(1, math.ceil(fraction * n))


def build_percentile_table(
    predictions: list[float], source_model_hash: str | None = None
) -> PercentileTable:
    if not predictions:
        raise AssignmentError("cannot build a percentile table from an empty prediction list")
    for p in predictions:
        if not 0.0 <= p <= 1.0:
            raise AssignmentError(f"prediction {p} outside [0, 1]")
    ordered = sorted(predictions)
    n = len(ordered)
    return PercentileTable(
        p33=ordered[nearest_rank(n, 0.33) - 1],
        p66=ordered[nearest_rank(n, 0.66) - 1],
        n=n,
        source_model_hash=source_model_hash,
        sorted_predictions=tuple(ordered),
    )


def assign_level(table: PercentileTable, probability: float) -> Level:
    """Half-open buckets: below p33 beginner, [p33, p66) intermediate, else advanced."""
    if not 0.0 <= probability <= 1.0:
        raise AssignmentError(f"probability {probability} outside [0, 1]")
    if probability < table.p33:
        return Level.BEGINNER
    if probability < table.p66:
        return Level.INTERMEDIATE
    return Level.ADVANCED


def select_variant(
    question: Question,
    assigned: Level,
    group: ExperimentGroup,
    rng_seed: int,
    student_id: str,
    exercise_id: str,
) -> tuple[Level, str]:
    """Resolve the shown variant for one exercise.

    Expected shows the assigned level, Control shows the question's original
    level, NonExpected picks uniformly between the two mismatched levels from
    a stream keyed on (seed, student, exercise) so replays agree.
    """
    if group is ExperimentGroup.EXPECTED:
        shown = assigned
    elif group is ExperimentGroup.CONTROL:
        shown = question.original_level
    else:
        others = [lv for lv in (Level.BEGINNER, Level.INTERMEDIATE, Level.ADVANCED) if lv != assigned]
        draw = unit_interval(rng_seed, "variant", student_id, exercise_id)
        shown = others[0] if draw < 0.5 else others[1]
    return shown, question.variants[shown].text


def assign_group(
    student_id: str,
    split: tuple[float, float, float] = DEFAULT_ARM_SPLIT,
    seed: int = 0,
) -> ExperimentGroup:
    """Deterministic arm for a student: hash of (seed, id) against the split."""
    if len(split) != 3 or any(s < 0 for s in split) or abs(sum(split) - 1.0) > 1e-9:
        raise AssignmentError(f"invalid arm split {split!r}; proportions must sum to 1")
    draw = unit_interval(seed, "group", student_id)
    if draw < split[0]:
        return ExperimentGroup.EXPECTED
    if draw < split[0] + split[1]:
        return ExperimentGroup.NON_EXPECTED
    return ExperimentGroup.CONTROL


def save_table(table: PercentileTable, path: str | Path) -> None:
    payload = {
        "p33": table.p33,
        "p66": table.p66,
        "n": table.n,
        "source_model_hash": table.source_model_hash,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_table(path: str | Path) -> PercentileTable:
    path = Path(path)
    if not path.exists():
        raise AssignmentError(f"percentile table file not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    try:
        return PercentileTable(
            p33=float(payload["p33"]),
            p66=float(payload["p66"]),
            n=int(payload["n"]),
            source_model_hash=payload.get("source_model_hash"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise AssignmentError(f"malformed percentile table file {path}: {exc}") from exc
