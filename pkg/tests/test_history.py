import pytest
from hypothesis import given, settings, strategies as st

from adaptivq.assignment import ExperimentGroup
from adaptivq.bank import Level
from adaptivq.history import (
    COLD_START,
    AttemptOutcome,
    EventLog,
    FeatureTracker,
    HistoryError,
    encounters,
    event_from_json,
    event_to_json,
    features_at,
    record_attempt,
)

from conftest import log_from, make_event

A, R, S = AttemptOutcome.ACCEPTED, AttemptOutcome.REJECTED, AttemptOutcome.SKIPPED


def brute_force_features(events, student_id, topic_id, before_seq):
    """Independent reference: filter prior events, group per exercise, count."""
    visible = [
        e
        for e in events
        if e.student_id == student_id and e.topic_id == topic_id and e.seq < before_seq
    ]
    per_exercise = {}
    for e in visible:
        per_exercise.setdefault(e.exercise_id, []).append(e.outcome)
    if not per_exercise:
        return (0.5, 0.0, 0)
    successes = skips = 0
    for outcomes in per_exercise.values():
        if any(o is A for o in outcomes):
            successes += 1
        elif any(o is S for o in outcomes):
            skips += 1
    n = len(per_exercise)
    return (successes / n, skips / n, n)


# random event streams: one student, several topics/exercises, increasing seq
def event_stream(min_size=0, max_size=40):
    outcome = st.sampled_from([A, R, S])
    exercise = st.integers(min_value=0, max_value=7)
    return st.lists(st.tuples(exercise, outcome), min_size=min_size, max_size=max_size)


def materialize(stream, student_id="s1"):
    events = []
    for seq, (ex, outcome) in enumerate(stream):
        events.append(
            make_event(
                seq,
                student_id=student_id,
                exercise_id=f"e{ex}",
                topic_id=f"t{ex % 3}",
                outcome=outcome,
            )
        )
    return events


class TestRecordAttempt:
    def test_append_one(self):
        log = EventLog()
        record_attempt(log, make_event(0))
        assert len(log) == 1

    def test_duplicate_seq_rejected(self):
        log = log_from([make_event(3)])
        with pytest.raises(HistoryError, match="out-of-order"):
            log.append(make_event(3))

    def test_lower_seq_rejected(self):
        log = log_from([make_event(5)])
        with pytest.raises(HistoryError, match="out-of-order"):
            log.append(make_event(4))

    def test_other_student_independent_seq(self):
        log = log_from([make_event(5, student_id="a")])
        log.append(make_event(2, student_id="b"))
        assert len(log) == 2

    def test_unknown_exercise_with_bank(self, fixture_bank):
        log = EventLog(bank=fixture_bank)
        with pytest.raises(HistoryError, match="unknown exercise"):
            log.append(make_event(0, exercise_id="ghost"))
        log.append(make_event(0, exercise_id="q-prob-mean", topic_id="probability"))
        assert len(log) == 1

    def test_negative_seq_rejected(self):
        with pytest.raises(HistoryError):
            make_event(-1)


class TestEncounters:
    def test_reject_then_accept(self):
        log = log_from([make_event(0, outcome=R), make_event(1, outcome=A)])
        (enc,) = encounters(log, "s1")
        assert enc.eventual_success and not enc.skipped and not enc.ultimate_failure

    def test_single_skip(self):
        log = log_from([make_event(0, outcome=S)])
        (enc,) = encounters(log, "s1")
        assert enc.skipped and not enc.eventual_success

    def test_interleaved_exercises_grouped_first_seen(self):
        log = log_from(
            [
                make_event(0, exercise_id="A", outcome=R),
                make_event(1, exercise_id="B", outcome=A),
                make_event(2, exercise_id="A", outcome=A),
            ]
        )
        encs = encounters(log, "s1")
        assert [e.exercise_id for e in encs] == ["A", "B"]
        assert encs[0].eventual_success

    def test_skip_then_late_accept_counts_success(self):
        log = log_from(
            [make_event(0, outcome=S), make_event(1, outcome=A)]
        )
        (enc,) = encounters(log, "s1")
        assert enc.eventual_success and not enc.skipped

    @given(event_stream())
    def test_flags_mutually_exclusive(self, stream):
        log = log_from(materialize(stream))
        for enc in encounters(log, "s1"):
            assert not (enc.eventual_success and enc.skipped)
            assert enc.eventual_success + enc.skipped + enc.ultimate_failure == 1


class TestFeaturesAt:
    def test_spec_ratios(self):
        # prior encounters: success, skip, success, all-rejected
        events = [
            make_event(0, exercise_id="e1", outcome=A),
            make_event(1, exercise_id="e2", outcome=S),
            make_event(2, exercise_id="e3", outcome=A),
            make_event(3, exercise_id="e4", outcome=R),
            make_event(4, exercise_id="e4", outcome=R),
            make_event(5, exercise_id="e4", outcome=R),
        ]
        feats = features_at(log_from(events), "s1", "t1", before_seq=6)
        assert feats.topic_success == 0.5
        assert feats.topic_skip == 0.25
        assert feats.prior_encounters == 4

    def test_cold_start(self):
        feats = features_at(EventLog(), "s1", "t1", before_seq=0)
        assert feats == COLD_START
        assert (feats.topic_success, feats.topic_skip, feats.prior_encounters) == (0.5, 0.0, 0)

    def test_other_topic_ignored(self):
        log = log_from([make_event(0, topic_id="other", outcome=A)])
        assert features_at(log, "s1", "t1", 5) == COLD_START

    def test_negative_before_seq(self):
        with pytest.raises(HistoryError):
            features_at(EventLog(), "s1", "t1", -1)

    def test_truncation_reclassifies_partial_encounter(self):
        # encounter whose accept falls past the horizon counts as failure-so-far
        events = [
            make_event(0, outcome=R),
            make_event(1, outcome=A),
        ]
        log = log_from(events)
        assert features_at(log, "s1", "t1", 1).topic_success == 0.0
        assert features_at(log, "s1", "t1", 2).topic_success == 1.0

    @settings(max_examples=200)
    @given(event_stream(), st.integers(min_value=0, max_value=45))
    def test_prefix_property_matches_brute_force(self, stream, before_seq):
        events = materialize(stream)
        log = log_from(events)
        for topic in ("t0", "t1", "t2"):
            feats = features_at(log, "s1", topic, before_seq)
            truncated = log_from([e for e in events if e.seq < before_seq])
            recomputed = features_at(truncated, "s1", topic, before_seq)
            assert feats == recomputed
            assert (feats.topic_success, feats.topic_skip, feats.prior_encounters) == (
                brute_force_features(events, "s1", topic, before_seq)
            )
            assert 0.0 <= feats.topic_success <= 1.0
            assert 0.0 <= feats.topic_skip <= 1.0


class TestFeatureTracker:
    @given(event_stream())
    def test_tracker_matches_features_at(self, stream):
        events = materialize(stream)
        log = log_from(events)
        tracker = FeatureTracker()
        for event in events:
            tracker.observe(event)
        for topic in ("t0", "t1", "t2"):
            assert tracker.features(topic) == features_at(log, "s1", topic, log.next_seq)

    @given(event_stream(min_size=1))
    def test_snapshot_before_new_exercise(self, stream):
        events = materialize(stream)
        log = log_from(events)
        tracker = FeatureTracker()
        for event in events:
            if tracker.is_new_exercise(event.exercise_id):
                snap = tracker.features(event.topic_id)
                assert snap == features_at(log, "s1", event.topic_id, event.seq)
            tracker.observe(event)


class TestPartition:
    @given(event_stream(min_size=1))
    def test_success_failure_skip_partition(self, stream):
        log = log_from(materialize(stream))
        encs = encounters(log, "s1")
        success = sum(1 for e in encs if e.eventual_success)
        skipped = sum(1 for e in encs if e.skipped)
        failed = sum(1 for e in encs if e.ultimate_failure)
        assert success + skipped + failed == len(encs)


class TestLogFile:
    def test_roundtrip(self, tmp_path):
        events = [
            make_event(0, outcome=R, assigned_level=Level.BEGINNER, phase="bootstrap"),
            make_event(1, outcome=A, group=ExperimentGroup.CONTROL, shown_level=Level.ADVANCED),
            make_event(2, student_id="z9", exercise_id="e7", outcome=S),
        ]
        log = log_from(events)
        path = tmp_path / "events.jsonl"
        log.save(path)
        replayed = EventLog.load(path)
        assert replayed.events == events

    def test_event_json_roundtrip(self):
        event = make_event(12, assigned_level=Level.ADVANCED, phase="bootstrap")
        assert event_from_json(event_to_json(event)) == event

    def test_malformed_line_reports_position(self, tmp_path):
        path = tmp_path / "events.jsonl"
        path.write_text(event_to_json(make_event(0)) + "\n{broken\n")
        with pytest.raises(HistoryError, match=":2"):
            EventLog.load(path)

    def test_unknown_outcome_rejected(self):
        line = event_to_json(make_event(0)).replace("accepted", "exploded")
        with pytest.raises(HistoryError):
            event_from_json(line)

    def test_missing_field_rejected(self):
        with pytest.raises(HistoryError, match="missing"):
            event_from_json('{"seq": 0}')

    def test_missing_file(self, tmp_path):
        with pytest.raises(HistoryError, match="not found"):
            EventLog.load(tmp_path / "none.jsonl")

    def test_subset_preserves_order(self):
        events = materialize([(0, A), (1, S), (0, R), (2, A)])
        log = log_from(events)
        sub = log.subset(lambda e: e.outcome is not S)
        assert [e.seq for e in sub.events] == [0, 2, 3]
