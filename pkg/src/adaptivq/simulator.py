"""Seeded synthetic student population and attempt-log generator.

The response model is item-response-style: per-attempt success depends on the
gap between student ability and question difficulty, plus a tunable bonus when
the shown variant level matches the student's true band. Skipping grows with
variant mismatch and shrinks with engagement. Both hypothesized effects are
explicit parameters so the null model (both zero) is exactly effect-free.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .assignment import (
    DEFAULT_ARM_SPLIT,
    ExperimentGroup,
    PercentileTable,
    assign_group,
    assign_level,
    build_percentile_table,
    select_variant,
)
from .bank import LEVELS, Level, Question, QuestionBank, QuestionVariant
from .history import (
    PHASE_BOOTSTRAP,
    PHASE_EXPERIMENT,
    AttemptEvent,
    AttemptOutcome,
    EventLog,
    FeatureTracker,
)
from .predictor import (
    LogisticModel,
    TrainConfig,
    build_training_set,
    model_hash,
    predict,
    sigmoid,
    train,
)
from .seeding import stable_hash64, unit_interval

logger = logging.getLogger(__name__)


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SimStudent:
    student_id: str
    abilities: dict[str, float]
    engagement: float
    true_band: Level

    @property
    def mean_ability(self) -> float:
        return sum(self.abilities.values()) / len(self.abilities)


@dataclass(frozen=True)
class SimConfig:
    n_students: int = 470
    n_topics: int = 3
    n_questions: int = 54
    bootstrap_exercises: int = 24
    exercises_per_student: int = 30
    max_attempts: int = 3
    ability_correlation: float = 0.9
    discrimination: float = 1.5
    base_difficulty: float = 0.4
    question_difficulty_spread: float = 0.6
    match_bonus: float = 2.3
    skip_base: float = -2.6
    mismatch_skip_boost: float = 1.2
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_students", "n_topics", "n_questions", "exercises_per_student"):
            if getattr(self, name) <= 0:
                raise SimulationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.bootstrap_exercises < 0:
            raise SimulationError("bootstrap_exercises must be non-negative")
        if self.max_attempts < 1:
            raise SimulationError("max_attempts must be at least 1")
        if not 0.0 <= self.ability_correlation <= 1.0:
            raise SimulationError("ability_correlation must lie in [0, 1]")


def load_sim_config(path: str | Path) -> SimConfig:
    path = Path(path)
    if not path.exists():
        raise SimulationError(f"simulation config file not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    known = {f.name for f in fields(SimConfig)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise SimulationError(f"unknown simulation config fields: {unknown}")
    return SimConfig(**payload)


def save_sim_config(config: SimConfig, path: str | Path) -> None:
    payload = {f.name: getattr(config, f.name) for f in fields(SimConfig)}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def topic_name(index: int) -> str:
    return f"topic-{index + 1:02d}"


def _band_for_rank(rank: int, n: int) -> Level:
    return LEVELS[min(2, (3 * rank) // n)]


def generate_population(config: SimConfig) -> list[SimStudent]:
    """Deterministic population; abilities are standard normal per student/topic,
    correlated through a per-student general ability. Bands are population
    terciles of mean ability, ties broken by rank order."""
    if config.n_students < 3:
        raise SimulationError("need at least 3 students to form ability terciles")
    topics = [topic_name(i) for i in range(config.n_topics)]
    rho = config.ability_correlation
    students: list[tuple[str, dict[str, float], float]] = []
    for i in range(config.n_students):
        student_id = f"s{i + 1:04d}"
        rng = np.random.default_rng(stable_hash64(config.seed, "student", student_id))
        general = rng.standard_normal()
        abilities = {
            t: float(rho * general + np.sqrt(1.0 - rho * rho) * rng.standard_normal())
            for t in topics
        }
        engagement = float(rng.standard_normal())
        students.append((student_id, abilities, engagement))
    order = sorted(
        range(len(students)),
        key=lambda idx: (sum(students[idx][1].values()) / len(students[idx][1]), idx),
    )
    bands: dict[int, Level] = {}
    for rank, idx in enumerate(order):
        bands[idx] = _band_for_rank(rank, config.n_students)
    return [
        SimStudent(student_id=sid, abilities=abilities, engagement=eng, true_band=bands[idx])
        for idx, (sid, abilities, eng) in enumerate(students)
    ]


def synthesize_bank(config: SimConfig) -> QuestionBank:
    """Generated bank sized to the run: ids and texts are deterministic, beginner
    phrasings padded longer and advanced ones kept short."""
    questions = []
    for i in range(config.n_questions):
        qid = f"g{i + 1:03d}"
        topic = topic_name(i % config.n_topics)
        concept = f"concept {i + 1} of {topic}"
        variants = {
            Level.BEGINNER: (
                f"Let us walk through {concept} one step at a time. Recall the definition "
                f"covered in the lesson, think about what it implies in a simple case, and "
                f"then state, in your own words, the short answer for exercise {qid}."
            ),
            Level.INTERMEDIATE: (
                f"Using the definition of {concept}, work out and state the short answer "
                f"for exercise {qid}."
            ),
            Level.ADVANCED: f"State the answer for {concept} ({qid}).",
        }
        questions.append(
            Question(
                id=qid,
                topic_id=topic,
                accepted_answers=frozenset({f"answer {qid}"}),
                variants={
                    lv: QuestionVariant(level=lv, text=text) for lv, text in variants.items()
                },
                original_level=Level.INTERMEDIATE if i % 2 == 0 else Level.ADVANCED,
            )
        )
    return QuestionBank(questions)


def question_difficulty(config: SimConfig, question: Question) -> float:
    """Per-question difficulty on the ability scale, stable across seeds."""
    offset = 2.0 * unit_interval("difficulty", question.id) - 1.0
    return config.base_difficulty + config.question_difficulty_spread * offset


def level_mismatch(shown_level: Level, true_band: Level) -> float:
    return abs(shown_level.value - true_band.value) / 2.0


def attempt_success_probability(
    config: SimConfig, student: SimStudent, question: Question, shown_level: Level
) -> float:
    ability = student.abilities[question.topic_id]
    mismatch = level_mismatch(shown_level, student.true_band)
    z = (
        config.discrimination * (ability - question_difficulty(config, question))
        + config.match_bonus * (1.0 - mismatch)
    )
    return float(sigmoid(z))


def skip_probability(config: SimConfig, student: SimStudent, shown_level: Level) -> float:
    mismatch = level_mismatch(shown_level, student.true_band)
    z = config.skip_base + config.mismatch_skip_boost * mismatch - student.engagement
    return float(sigmoid(z))


@dataclass
class ExperimentArtifacts:
    """What a full run produces beyond the log; populated in bootstrap mode."""

    log: EventLog
    model: LogisticModel | None = None
    table: PercentileTable | None = None
    students: list[SimStudent] = field(default_factory=list)


def _student_question_order(
    config: SimConfig, bank: QuestionBank, student_id: str
) -> list[Question]:
    """Per-student question order: deterministic shuffle, wrap-around on reuse."""
    questions = list(bank)
    rng = np.random.default_rng(stable_hash64(config.seed, "order", student_id))
    perm = rng.permutation(len(questions))
    ordered = [questions[i] for i in perm]
    needed = config.bootstrap_exercises + config.exercises_per_student
    if needed > len(ordered):
        reps = -(-needed // len(ordered))
        ordered = ordered * reps
    return ordered[:needed]


def _play_encounter(
    log: EventLog,
    tracker: FeatureTracker,
    config: SimConfig,
    student: SimStudent,
    question: Question,
    shown_level: Level,
    assigned_level: Level | None,
    group: ExperimentGroup,
    phase: str,
    rng: np.random.Generator,
) -> None:
    """Sample one encounter and append its events: a skip decision first, then
    up to max_attempts Bernoulli attempts ending on the first success."""

    def emit(outcome: AttemptOutcome) -> None:
        event = AttemptEvent(
            seq=log.next_seq,
            student_id=student.student_id,
            exercise_id=question.id,
            topic_id=question.topic_id,
            group=group,
            shown_level=shown_level,
            outcome=outcome,
            assigned_level=assigned_level,
            phase=phase,
        )
        log.append(event)
        tracker.observe(event)

    p_skip = skip_probability(config, student, shown_level)
    if rng.random() < p_skip:
        emit(AttemptOutcome.SKIPPED)
        return
    p_success = attempt_success_probability(config, student, question, shown_level)
    for _ in range(config.max_attempts):
        success = rng.random() < p_success
        emit(AttemptOutcome.ACCEPTED if success else AttemptOutcome.REJECTED)
        if success:
            return


def run_experiment(
    config: SimConfig,
    bank: QuestionBank | None = None,
    arm_split: tuple[float, float, float] = DEFAULT_ARM_SPLIT,
    engine: tuple[LogisticModel, PercentileTable] | None = None,
    train_config: TrainConfig = TrainConfig(),
) -> EventLog:
    return run_experiment_detailed(config, bank, arm_split, engine, train_config).log


def run_experiment_detailed(
    config: SimConfig,
    bank: QuestionBank | None = None,
    arm_split: tuple[float, float, float] = DEFAULT_ARM_SPLIT,
    engine: tuple[LogisticModel, PercentileTable] | None = None,
    train_config: TrainConfig = TrainConfig(),
) -> ExperimentArtifacts:
    """Two-phase run. Phase 1 plays original-level variants to accumulate
    history; unless an engine is supplied, the predictor and percentile table
    are then fit on that history. Phase 2 assigns a variant per arm for every
    new exercise and samples outcomes. Students are interleaved round-robin
    with per-student RNG streams, so the log is reproducible event-for-event.
    """
    if bank is None:
        bank = synthesize_bank(config)
    needed = config.bootstrap_exercises + config.exercises_per_student
    if needed > len(bank):
        logger.warning(
            "bank of %d questions is smaller than %d exercises per student; reusing questions",
            len(bank),
            needed,
        )
    students = generate_population(config)
    groups = {
        s.student_id: assign_group(s.student_id, arm_split, config.seed) for s in students
    }
    orders = {s.student_id: _student_question_order(config, bank, s.student_id) for s in students}
    streams = {
        s.student_id: np.random.default_rng(stable_hash64(config.seed, "play", s.student_id))
        for s in students
    }
    trackers = {s.student_id: FeatureTracker() for s in students}
    log = EventLog()

    for round_no in range(config.bootstrap_exercises):
        for student in students:
            question = orders[student.student_id][round_no]
            _play_encounter(
                log,
                trackers[student.student_id],
                config,
                student,
                question,
                shown_level=question.original_level,
                assigned_level=None,
                group=groups[student.student_id],
                phase=PHASE_BOOTSTRAP,
                rng=streams[student.student_id],
            )

    if engine is not None:
        model, table = engine
    else:
        points = build_training_set(log)
        if not points:
            raise SimulationError(
                "bootstrap phase produced no encounters to train on; "
                "set bootstrap_exercises > 0 or pass an engine"
            )
        model = train(points, train_config)
        predictions = [predict(model, p.features) for p in points]
        table = build_percentile_table(predictions, source_model_hash=model_hash(model))

    for round_no in range(config.exercises_per_student):
        for student in students:
            question = orders[student.student_id][config.bootstrap_exercises + round_no]
            # tracker snapshot == features_at(log, student, topic, log.next_seq)
            feats = trackers[student.student_id].features(question.topic_id)
            probability = predict(model, feats)
            assigned = assign_level(table, probability)
            shown, _text = select_variant(
                question,
                assigned,
                groups[student.student_id],
                config.seed,
                student.student_id,
                question.id,
            )
            _play_encounter(
                log,
                trackers[student.student_id],
                config,
                student,
                question,
                shown_level=shown,
                assigned_level=assigned,
                group=groups[student.student_id],
                phase=PHASE_EXPERIMENT,
                rng=streams[student.student_id],
            )

    return ExperimentArtifacts(log=log, model=model, table=table, students=students)


def null_config(config: SimConfig) -> SimConfig:
    """Same run with both hypothesized effects switched off."""
    return replace(config, match_bonus=0.0, mismatch_skip_boost=0.0)
