import time

import pytest

from adaptivq.assignment import ExperimentGroup
from adaptivq.bank import Level, load_bank, load_ratings
from adaptivq.cli import FIXTURE_BANK, FIXTURE_RATINGS
from adaptivq.history import AttemptEvent, AttemptOutcome, EventLog
from adaptivq.simulator import SimConfig, run_experiment_detailed, null_config


@pytest.fixture(scope="session")
def fixture_bank():
    return load_bank(FIXTURE_BANK)


@pytest.fixture(scope="session")
def fixture_ratings():
    return load_ratings(FIXTURE_RATINGS)


def make_event(
    seq,
    student_id="s1",
    exercise_id="e1",
    topic_id="t1",
    group=ExperimentGroup.EXPECTED,
    shown_level=Level.INTERMEDIATE,
    outcome=AttemptOutcome.ACCEPTED,
    assigned_level=None,
    phase="experiment",
):
    return AttemptEvent(
        seq=seq,
        student_id=student_id,
        exercise_id=exercise_id,
        topic_id=topic_id,
        group=group,
        shown_level=shown_level,
        outcome=outcome,
        assigned_level=assigned_level,
        phase=phase,
    )


def log_from(events):
    log = EventLog()
    log.extend(events)
    return log


@pytest.fixture(scope="session")
def default_runs():
    """Seeds 0-19 of the default calibrated simulation, shared by the
    acceptance tests; elapsed wall time is recorded for the runtime budget."""
    start = time.monotonic()
    runs = [run_experiment_detailed(SimConfig(seed=seed)) for seed in range(20)]
    elapsed = time.monotonic() - start
    return {"runs": runs, "elapsed_seconds": elapsed}


@pytest.fixture(scope="session")
def null_runs():
    """Seeds 0-19 with both effect parameters zeroed."""
    return [
        run_experiment_detailed(null_config(SimConfig(seed=seed))) for seed in range(20)
    ]
