"""Append-only attempt log, encounter grouping, and the two per-topic features.

The log is the system of record: replaying the file rebuilds identical state.
Every derived quantity (encounters, features, metrics) is a pure function of
the event sequence.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .assignment import ExperimentGroup
from .bank import Level, QuestionBank


class HistoryError(ValueError):
    pass


PHASE_BOOTSTRAP = "bootstrap"
PHASE_EXPERIMENT = "experiment"


class AttemptOutcome(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    SKIPPED = "skipped"

    @classmethod
    def parse(cls, raw: str) -> "AttemptOutcome":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise HistoryError(f"unknown outcome {raw!r}") from None


@dataclass(frozen=True)
class AttemptEvent:
    seq: int
    student_id: str
    exercise_id: str
    topic_id: str
    group: ExperimentGroup
    shown_level: Level
    outcome: AttemptOutcome
    assigned_level: Level | None = None
    phase: str = PHASE_EXPERIMENT

    def __post_init__(self) -> None:
        if self.seq < 0:
            raise HistoryError(f"event seq must be non-negative, got {self.seq}")
        if self.phase not in (PHASE_BOOTSTRAP, PHASE_EXPERIMENT):
            raise HistoryError(f"unknown phase {self.phase!r}")


@dataclass
class Encounter:
    """All of one student's attempts on one exercise, in seq order."""

    student_id: str
    exercise_id: str
    topic_id: str
    attempts: list[AttemptEvent]

    @property
    def first_seq(self) -> int:
        return self.attempts[0].seq

    @property
    def eventual_success(self) -> bool:
        return any(a.outcome is AttemptOutcome.ACCEPTED for a in self.attempts)

    @property
    def skipped(self) -> bool:
        return not self.eventual_success and any(
            a.outcome is AttemptOutcome.SKIPPED for a in self.attempts
        )

    @property
    def ultimate_failure(self) -> bool:
        return not self.eventual_success and not self.skipped


@dataclass(frozen=True)
class StudentFeatures:
    topic_success: float
    topic_skip: float
    prior_encounters: int


# Uninformative defaults for a student with no prior encounters in the topic.
COLD_START = StudentFeatures(topic_success=0.5, topic_skip=0.0, prior_encounters=0)


class EventLog:
    """In-memory event log; appends validate per-student seq monotonicity."""

    def __init__(self, bank: QuestionBank | None = None):
        self._bank = bank
        self._events: list[AttemptEvent] = []
        self._by_student: dict[str, list[AttemptEvent]] = {}
        self._last_seq: dict[str, int] = {}
        self._max_seq = -1

    def __len__(self) -> int:
        return len(self._events)

    @property
    def events(self) -> list[AttemptEvent]:
        return list(self._events)

    @property
    def next_seq(self) -> int:
        return self._max_seq + 1

    def student_ids(self) -> list[str]:
        return list(self._by_student)

    def events_for(self, student_id: str) -> list[AttemptEvent]:
        return list(self._by_student.get(student_id, ()))

    def append(self, event: AttemptEvent) -> None:
        last = self._last_seq.get(event.student_id)
        if last is not None and event.seq <= last:
            raise HistoryError(
                f"out-of-order seq {event.seq} for student {event.student_id} (last was {last})"
            )
        if self._bank is not None and event.exercise_id not in self._bank:
            raise HistoryError(f"unknown exercise {event.exercise_id!r} for attached bank")
        self._events.append(event)
        self._by_student.setdefault(event.student_id, []).append(event)
        self._last_seq[event.student_id] = event.seq
        self._max_seq = max(self._max_seq, event.seq)

    def extend(self, events: Iterable[AttemptEvent]) -> None:
        for event in events:
            self.append(event)

    def subset(self, keep: Callable[[AttemptEvent], bool]) -> "EventLog":
        """New log holding the events that pass the filter; order preserved."""
        out = EventLog()
        for event in self._events:
            if keep(event):
                out.append(event)
        return out

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for event in self._events:
                fh.write(event_to_json(event) + "\n")

    @classmethod
    def load(cls, path: str | Path, bank: QuestionBank | None = None) -> "EventLog":
        path = Path(path)
        if not path.exists():
            raise HistoryError(f"event log file not found: {path}")
        log = cls(bank=bank)
        with path.open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    log.append(event_from_json(line))
                except HistoryError as exc:
                    raise HistoryError(f"{path}:{line_no}: {exc}") from exc
        return log


def event_to_json(event: AttemptEvent) -> str:
    return json.dumps(
        {
            "seq": event.seq,
            "student_id": event.student_id,
            "exercise_id": event.exercise_id,
            "topic_id": event.topic_id,
            "group": event.group.value,
            "shown_level": event.shown_level.label,
            "outcome": event.outcome.value,
            "assigned_level": event.assigned_level.label if event.assigned_level else None,
            "phase": event.phase,
        },
        ensure_ascii=False,
    )


def event_from_json(line: str) -> AttemptEvent:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise HistoryError(f"malformed event line: {exc}") from exc
    try:
        assigned = rec.get("assigned_level")
        return AttemptEvent(
            seq=int(rec["seq"]),
            student_id=rec["student_id"],
            exercise_id=rec["exercise_id"],
            topic_id=rec["topic_id"],
            group=ExperimentGroup.parse(rec["group"]),
            shown_level=Level.parse(rec["shown_level"]),
            outcome=AttemptOutcome.parse(rec["outcome"]),
            assigned_level=Level.parse(assigned) if assigned else None,
            phase=rec.get("phase", PHASE_EXPERIMENT),
        )
    except KeyError as exc:
        raise HistoryError(f"event record missing field: {exc}") from exc
    except HistoryError:
        raise
    except (TypeError, ValueError) as exc:
        raise HistoryError(f"bad event record: {exc}") from exc


def record_attempt(log: EventLog, event: AttemptEvent) -> EventLog:
    log.append(event)
    return log


def group_encounters(events: Iterable[AttemptEvent]) -> list[Encounter]:
    """Group events (already filtered to one student) by exercise, first-seen order."""
    grouped: dict[str, Encounter] = {}
    for event in events:
        enc = grouped.get(event.exercise_id)
        if enc is None:
            grouped[event.exercise_id] = Encounter(
                student_id=event.student_id,
                exercise_id=event.exercise_id,
                topic_id=event.topic_id,
                attempts=[event],
            )
        else:
            enc.attempts.append(event)
    return list(grouped.values())


def encounters(log: EventLog, student_id: str) -> list[Encounter]:
    return group_encounters(log.events_for(student_id))


def features_at(
    log: EventLog, student_id: str, topic_id: str, before_seq: int
) -> StudentFeatures:
    """The two per-topic features over encounters strictly before before_seq.

    Only events with seq < before_seq are visible, so an encounter whose later
    attempts fall past the horizon is classified from its visible prefix.
    """
    if before_seq < 0:
        raise HistoryError(f"before_seq must be non-negative, got {before_seq}")
    visible = [
        e
        for e in log.events_for(student_id)
        if e.seq < before_seq and e.topic_id == topic_id
    ]
    prior = group_encounters(visible)
    if not prior:
        return COLD_START
    n = len(prior)
    return StudentFeatures(
        topic_success=sum(1 for enc in prior if enc.eventual_success) / n,
        topic_skip=sum(1 for enc in prior if enc.skipped) / n,
        prior_encounters=n,
    )


class FeatureTracker:
    """Incremental equivalent of features_at over one student's event stream.

    Feed events in seq order; features(topic) then equals
    features_at(log, student, topic, last_seq + 1). Encounter flags are
    re-derived per event, so a skip later overridden by an acceptance moves
    the encounter between buckets exactly as the batch computation would.
    """

    def __init__(self) -> None:
        self._counts: dict[str, list[int]] = {}  # topic -> [encounters, successes, skips]
        self._flags: dict[str, list[bool]] = {}  # exercise -> [success_seen, skip_seen]
        self._topic_of: dict[str, str] = {}

    def observe(self, event: AttemptEvent) -> None:
        flags = self._flags.get(event.exercise_id)
        counts = self._counts.setdefault(event.topic_id, [0, 0, 0])
        if flags is None:
            flags = [False, False]
            self._flags[event.exercise_id] = flags
            self._topic_of[event.exercise_id] = event.topic_id
            counts[0] += 1
        if event.outcome is AttemptOutcome.ACCEPTED and not flags[0]:
            flags[0] = True
            counts[1] += 1
            if flags[1]:
                counts[2] -= 1  # success trumps an earlier skip
        elif event.outcome is AttemptOutcome.SKIPPED and not flags[1]:
            flags[1] = True
            if not flags[0]:
                counts[2] += 1

    def features(self, topic_id: str) -> StudentFeatures:
        counts = self._counts.get(topic_id)
        if not counts or counts[0] == 0:
            return COLD_START
        n, successes, skips = counts
        return StudentFeatures(
            topic_success=successes / n, topic_skip=skips / n, prior_encounters=n
        )

    def is_new_exercise(self, exercise_id: str) -> bool:
        return exercise_id not in self._flags
