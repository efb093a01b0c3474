"""Question bank: questions with three difficulty-levelled phrasings sharing one answer."""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum
from functools import total_ordering
from pathlib import Path


class BankError(ValueError):
    """A bank or ratings file violates the schema; message names the question and field."""


@total_ordering
class Level(Enum):
    BEGINNER = 0
    INTERMEDIATE = 1
    ADVANCED = 2

    def __lt__(self, other: "Level") -> bool:
        if not isinstance(other, Level):
            return NotImplemented
        return self.value < other.value

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, raw: str) -> "Level":
        try:
            return cls[raw.strip().upper()]
        except KeyError:
            raise BankError(f"unknown level {raw!r}") from None


LEVELS = (Level.BEGINNER, Level.INTERMEDIATE, Level.ADVANCED)


def word_count(text: str) -> int:
    """Number of maximal whitespace-separated tokens in text."""
    tokens = text.split()
    if not tokens:
        raise BankError("text is empty or whitespace-only")
    return len(tokens)


@dataclass(frozen=True)
class QuestionVariant:
    level: Level
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise BankError(f"variant {self.level.label}: text is empty")

    @property
    def word_count(self) -> int:
        return word_count(self.text)


@dataclass(frozen=True)
class Question:
    id: str
    topic_id: str
    accepted_answers: frozenset[str]
    variants: dict[Level, QuestionVariant]
    original_level: Level

    def __post_init__(self) -> None:
        if not self.id:
            raise BankError("question id is empty")
        if not self.accepted_answers:
            raise BankError(f"question {self.id}: accepted_answers is empty")
        missing = [lv.label for lv in LEVELS if lv not in self.variants]
        if missing:
            raise BankError(f"question {self.id}: missing variants {missing}")
        if self.original_level == Level.BEGINNER:
            raise BankError(f"question {self.id}: original_level must be intermediate or advanced")

    def variant(self, level: Level) -> QuestionVariant:
        return self.variants[level]


@dataclass(frozen=True)
class VariantRating:
    question_id: str
    level: Level
    rater_id: str
    difficulty: float
    fluency: float
    meaning_preservation: float

    def __post_init__(self) -> None:
        for field_name in ("difficulty", "fluency", "meaning_preservation"):
            score = getattr(self, field_name)
            if not 0.0 <= score <= 5.0:
                raise BankError(
                    f"rating for {self.question_id}/{self.level.label}: "
                    f"{field_name}={score} outside [0, 5]"
                )


class QuestionBank:
    """Immutable after construction; keyed by question id, iteration order = file order."""

    def __init__(self, questions: Iterable[Question]):
        self._questions: dict[str, Question] = {}
        for q in questions:
            if q.id in self._questions:
                raise BankError(f"duplicate question id {q.id}")
            self._questions[q.id] = q

    def __len__(self) -> int:
        return len(self._questions)

    def __iter__(self) -> Iterator[Question]:
        return iter(self._questions.values())

    def __contains__(self, question_id: str) -> bool:
        return question_id in self._questions

    def get(self, question_id: str) -> Question:
        try:
            return self._questions[question_id]
        except KeyError:
            raise BankError(f"unknown question id {question_id}") from None

    def topics(self) -> list[str]:
        seen: dict[str, None] = {}
        for q in self:
            seen.setdefault(q.topic_id, None)
        return list(seen)

    def by_topic(self, topic_id: str) -> list[Question]:
        return [q for q in self if q.topic_id == topic_id]


def _parse_question(record: dict) -> Question:
    qid = record.get("id")
    if not isinstance(qid, str) or not qid:
        raise BankError(f"question record without a usable id: {record!r}")
    for field_name in ("topic_id", "accepted_answers", "original_level", "variants"):
        if field_name not in record:
            raise BankError(f"question {qid}: missing field {field_name!r}")
    answers = record["accepted_answers"]
    if not isinstance(answers, list) or not all(isinstance(a, str) for a in answers):
        raise BankError(f"question {qid}: accepted_answers must be a list of strings")
    raw_variants = record["variants"]
    if not isinstance(raw_variants, dict):
        raise BankError(f"question {qid}: variants must be an object")
    variants: dict[Level, QuestionVariant] = {}
    for level in LEVELS:
        if level.label not in raw_variants:
            raise BankError(f"question {qid}: missing variant level {level.label!r}")
        variants[level] = QuestionVariant(level=level, text=raw_variants[level.label])
    try:
        return Question(
            id=qid,
            topic_id=record["topic_id"],
            accepted_answers=frozenset(answers),
            variants=variants,
            original_level=Level.parse(record["original_level"]),
        )
    except BankError:
        raise
    except (TypeError, ValueError) as exc:
        raise BankError(f"question {qid}: {exc}") from exc


def load_bank(path: str | Path) -> QuestionBank:
    path = Path(path)
    if not path.exists():
        raise BankError(f"bank file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BankError(f"bank file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("questions"), list):
        raise BankError(f"bank file {path} must contain a top-level 'questions' array")
    return QuestionBank(_parse_question(rec) for rec in payload["questions"])


def save_bank(bank: QuestionBank, path: str | Path) -> None:
    records = []
    for q in bank:
        records.append(
            {
                "id": q.id,
                "topic_id": q.topic_id,
                "accepted_answers": sorted(q.accepted_answers),
                "original_level": q.original_level.label,
                "variants": {lv.label: q.variants[lv].text for lv in LEVELS},
            }
        )
    Path(path).write_text(
        json.dumps({"questions": records}, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_ratings(path: str | Path) -> list[VariantRating]:
    path = Path(path)
    if not path.exists():
        raise BankError(f"ratings file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BankError(f"ratings file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise BankError(f"ratings file {path} must contain a top-level array")
    ratings = []
    for rec in payload:
        try:
            ratings.append(
                VariantRating(
                    question_id=rec["question_id"],
                    level=Level.parse(rec["level"]),
                    rater_id=rec["rater_id"],
                    difficulty=float(rec["difficulty"]),
                    fluency=float(rec["fluency"]),
                    meaning_preservation=float(rec["meaning_preservation"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise BankError(f"malformed rating record {rec!r}: {exc}") from exc
    return ratings


@dataclass(frozen=True)
class LevelSummary:
    difficulty: float
    fluency: float
    meaning_preservation: float
    word_count: float


# Expert-rating means and per-level mean word counts used as ordering references
# by validate_bank_fixture: difficulty must rise with level, length must fall.
REFERENCE_RATING_MEANS: dict[Level, LevelSummary] = {
    Level.BEGINNER: LevelSummary(1.689, 4.600, 4.789, 39.800),
    Level.INTERMEDIATE: LevelSummary(2.667, 4.683, 4.839, 33.533),
    Level.ADVANCED: LevelSummary(3.939, 4.544, 4.717, 27.433),
}


def rating_summary(
    ratings: Iterable[VariantRating], bank: QuestionBank
) -> dict[Level, LevelSummary]:
    """Arithmetic means per level; word counts come from the bank's variants."""
    by_level: dict[Level, list[VariantRating]] = {lv: [] for lv in LEVELS}
    for r in ratings:
        by_level[r.level].append(r)
    summary: dict[Level, LevelSummary] = {}
    for level in LEVELS:
        group = by_level[level]
        if not group:
            raise BankError(f"no ratings for level {level.label}")
        counts = [q.variants[level].word_count for q in bank]
        summary[level] = LevelSummary(
            difficulty=sum(r.difficulty for r in group) / len(group),
            fluency=sum(r.fluency for r in group) / len(group),
            meaning_preservation=sum(r.meaning_preservation for r in group) / len(group),
            word_count=sum(counts) / len(counts) if counts else 0.0,
        )
    return summary


def validate_bank_fixture(
    bank: QuestionBank, ratings: Iterable[VariantRating] | None = None
) -> list[str]:
    """Non-fatal checks: beginner phrasings must outlength advanced ones, and mean
    rated difficulty must strictly increase with level. Returns warning strings."""
    warnings: list[str] = []
    for q in bank:
        if q.variants[Level.BEGINNER].word_count <= q.variants[Level.ADVANCED].word_count:
            warnings.append(
                f"question {q.id}: beginner variant ({q.variants[Level.BEGINNER].word_count} words) "
                f"is not longer than advanced ({q.variants[Level.ADVANCED].word_count} words)"
            )
    if ratings is not None:
        ratings = list(ratings)
        unknown = sorted({r.question_id for r in ratings if r.question_id not in bank})
        for qid in unknown:
            warnings.append(f"ratings reference unknown question {qid}")
        known = [r for r in ratings if r.question_id in bank]
        if any(not [r for r in known if r.level == lv] for lv in LEVELS):
            warnings.append("ratings do not cover all three levels; difficulty ordering not checked")
        elif known:
            summary = rating_summary(known, bank)
            means = [summary[lv].difficulty for lv in LEVELS]
            if not (means[0] < means[1] < means[2]):
                warnings.append(
                    "mean rated difficulty is not strictly increasing "
                    f"beginner->advanced: {means[0]:.3f}, {means[1]:.3f}, {means[2]:.3f}"
                )
    return warnings
