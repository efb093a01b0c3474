"""HTTP session service for the live tutoring loop.

All state changes append to the event-log file; restarting the service and
replaying that file reconstructs every student's history, so sessions are
ephemeral but profiles and analytics survive crashes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .analytics import AnalyticsError, group_report, report_to_dict
from .assignment import (
    DEFAULT_ARM_SPLIT,
    ExperimentGroup,
    PercentileTable,
    assign_group,
    assign_level,
    select_variant,
)
from .bank import Level, QuestionBank
from .history import (
    PHASE_EXPERIMENT,
    AttemptEvent,
    AttemptOutcome,
    EventLog,
    event_to_json,
    features_at,
)
from .predictor import LogisticModel, predict


class ServiceError(Exception):
    status_code = 500
    error = "internal"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class SequencingError(ServiceError):
    status_code = 409
    error = "sequencing"


class UnknownIdError(ServiceError):
    status_code = 404
    error = "not_found"


class BadRequestError(ServiceError):
    status_code = 400
    error = "bad_request"


def normalize_answer(raw: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return " ".join(raw.lower().split())


@dataclass
class OpenExercise:
    exercise_id: str
    topic_id: str
    shown_level: Level
    assigned_level: Level
    probability: float
    attempts_used: int = 0


@dataclass
class Session:
    session_id: str
    student_id: str
    group: ExperimentGroup
    current: OpenExercise | None = None


class TutorService:
    """Session/state container behind the HTTP routes. One lock serializes all
    mutations, which also funnels log appends through a single writer."""

    def __init__(
        self,
        bank: QuestionBank,
        model: LogisticModel,
        table: PercentileTable,
        log_path: str | Path,
        max_attempts: int = 3,
        seed: int = 0,
        arm_split: tuple[float, float, float] = DEFAULT_ARM_SPLIT,
    ):
        self.bank = bank
        self.model = model
        self.table = table
        self.max_attempts = max_attempts
        self.seed = seed
        self.arm_split = arm_split
        self.log_path = Path(log_path)
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        self._session_counter = 0
        if self.log_path.exists():
            self.log = EventLog.load(self.log_path, bank=bank)
        else:
            self.log = EventLog(bank=bank)
            self.log_path.touch()
        self._log_file = self.log_path.open("a", encoding="utf-8")

    # -- internals ---------------------------------------------------------

    def _append(self, event: AttemptEvent) -> None:
        self.log.append(event)
        self._log_file.write(event_to_json(event) + "\n")
        self._log_file.flush()

    def _session(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownIdError(f"unknown session {session_id!r}") from None

    def _seen_exercises(self, student_id: str) -> set[str]:
        return {e.exercise_id for e in self.log.events_for(student_id)}

    def _pick_question(self, student_id: str):
        """Next unseen question, cycling topics in bank order."""
        seen = self._seen_exercises(student_id)
        topics = self.bank.topics()
        start = len(seen) % len(topics)
        for hop in range(len(topics)):
            topic = topics[(start + hop) % len(topics)]
            for question in self.bank.by_topic(topic):
                if question.id not in seen:
                    return question
        raise SequencingError(f"question bank exhausted for student {student_id!r}")

    # -- operations ----------------------------------------------------------

    def start_session(self, student_id: str, forced_group: str | None = None) -> dict:
        if not student_id or not student_id.strip():
            raise BadRequestError("student_id must be a non-empty string")
        with self._lock:
            if forced_group is not None:
                try:
                    group = ExperimentGroup.parse(forced_group)
                except ValueError as exc:
                    raise BadRequestError(str(exc)) from exc
            else:
                group = assign_group(student_id, self.arm_split, self.seed)
            self._session_counter += 1
            session = Session(
                session_id=f"sess-{self._session_counter:06d}",
                student_id=student_id,
                group=group,
            )
            self._sessions[session.session_id] = session
            return {"session_id": session.session_id, "group": group.value}

    def next_exercise(self, session_id: str) -> dict:
        with self._lock:
            session = self._session(session_id)
            if session.current is not None:
                raise SequencingError(
                    f"exercise {session.current.exercise_id} is still open; "
                    "submit an attempt or skip first"
                )
            question = self._pick_question(session.student_id)
            feats = features_at(
                self.log, session.student_id, question.topic_id, self.log.next_seq
            )
            probability = predict(self.model, feats)
            assigned = assign_level(self.table, probability)
            shown, text = select_variant(
                question, assigned, session.group, self.seed, session.student_id, question.id
            )
            session.current = OpenExercise(
                exercise_id=question.id,
                topic_id=question.topic_id,
                shown_level=shown,
                assigned_level=assigned,
                probability=probability,
            )
            return {
                "exercise_id": question.id,
                "shown_level": shown.label,
                "text": text,
            }

    def submit_attempt(self, session_id: str, answer: str) -> dict:
        with self._lock:
            session = self._session(session_id)
            current = session.current
            if current is None:
                raise SequencingError("no exercise is open; call next first")
            question = self.bank.get(current.exercise_id)
            accepted_forms = {normalize_answer(a) for a in question.accepted_answers}
            accepted = normalize_answer(answer) in accepted_forms
            current.attempts_used += 1
            outcome = AttemptOutcome.ACCEPTED if accepted else AttemptOutcome.REJECTED
            self._append(
                AttemptEvent(
                    seq=self.log.next_seq,
                    student_id=session.student_id,
                    exercise_id=current.exercise_id,
                    topic_id=current.topic_id,
                    group=session.group,
                    shown_level=current.shown_level,
                    outcome=outcome,
                    assigned_level=current.assigned_level,
                    phase=PHASE_EXPERIMENT,
                )
            )
            remaining = self.max_attempts - current.attempts_used
            closed = accepted or remaining == 0
            if closed:
                session.current = None
            return {
                "outcome": outcome.value,
                "attempts_remaining": remaining,
                "exercise_closed": closed,
            }

    def skip_exercise(self, session_id: str) -> dict:
        with self._lock:
            session = self._session(session_id)
            current = session.current
            if current is None:
                raise SequencingError("no exercise is open; call next first")
            self._append(
                AttemptEvent(
                    seq=self.log.next_seq,
                    student_id=session.student_id,
                    exercise_id=current.exercise_id,
                    topic_id=current.topic_id,
                    group=session.group,
                    shown_level=current.shown_level,
                    outcome=AttemptOutcome.SKIPPED,
                    assigned_level=current.assigned_level,
                    phase=PHASE_EXPERIMENT,
                )
            )
            session.current = None
            return {"closed": True}

    def get_profile(self, session_id: str) -> dict:
        with self._lock:
            session = self._session(session_id)
            features = {}
            for topic in self.bank.topics():
                feats = features_at(self.log, session.student_id, topic, self.log.next_seq)
                features[topic] = {
                    "success": feats.topic_success,
                    "skip": feats.topic_skip,
                    "prior_encounters": feats.prior_encounters,
                }
            if session.current is not None:
                probability = session.current.probability
                assigned = session.current.assigned_level
            else:
                probability, assigned = self._peek_assignment(session.student_id)
            return {
                "features": features,
                "probability": probability,
                "assigned_level": assigned.label if assigned else None,
                "group": session.group.value,
            }

    def _peek_assignment(self, student_id: str) -> tuple[float | None, Level | None]:
        """Assignment preview for the exercise next() would serve; no state change."""
        try:
            question = self._pick_question(student_id)
        except SequencingError:
            return None, None
        feats = features_at(self.log, student_id, question.topic_id, self.log.next_seq)
        probability = predict(self.model, feats)
        return probability, assign_level(self.table, probability)

    def experiment_report(self, alpha: float = 0.05) -> dict:
        with self._lock:
            try:
                report = group_report(self.log, alpha=alpha)
            except AnalyticsError as exc:
                raise BadRequestError(f"insufficient data for a report: {exc}") from exc
            if len(report.groups) < 2:
                raise BadRequestError(
                    "insufficient data for a report: need at least 2 students in "
                    "each of at least 2 arms"
                )
            return report_to_dict(report)

    def close(self) -> None:
        self._log_file.close()


class StartSessionBody(BaseModel):
    student_id: str
    group: str | None = None


class AttemptBody(BaseModel):
    answer: str


def create_app(service: TutorService) -> FastAPI:
    app = FastAPI(title="adaptivq session service")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def service_error_handler(_request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status_code, content={"error": exc.error, "detail": exc.detail}
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"error": "bad_request", "detail": str(exc.errors())}
        )

    @app.post("/sessions")
    def start_session(body: StartSessionBody):
        return service.start_session(body.student_id, body.group)

    @app.get("/sessions/{session_id}/next")
    def next_exercise(session_id: str):
        return service.next_exercise(session_id)

    @app.post("/sessions/{session_id}/attempt")
    def submit_attempt(session_id: str, body: AttemptBody):
        return service.submit_attempt(session_id, body.answer)

    @app.post("/sessions/{session_id}/skip")
    def skip_exercise(session_id: str):
        return service.skip_exercise(session_id)

    @app.get("/sessions/{session_id}/profile")
    def get_profile(session_id: str):
        return service.get_profile(session_id)

    @app.get("/experiment/report")
    def experiment_report(alpha: float = 0.05):
        return service.experiment_report(alpha)

    return app
