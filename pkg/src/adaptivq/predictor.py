"""Two-feature logistic regression predicting next-exercise success.

Three parameters on a convex objective: full-batch gradient descent from zeros
is exact enough and keeps training bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .history import EventLog, FeatureTracker, StudentFeatures, group_encounters


class PredictorError(ValueError):
    pass


@dataclass(frozen=True)
class TrainingPoint:
    features: StudentFeatures
    label: bool
    student_id: str
    topic_id: str
    exercise_id: str
    first_seq: int


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    max_iterations: int = 5000
    tolerance: float = 1e-8
    l2_penalty: float = 0.0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise PredictorError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.max_iterations <= 0:
            raise PredictorError(f"max_iterations must be positive, got {self.max_iterations}")
        if self.tolerance <= 0:
            raise PredictorError(f"tolerance must be positive, got {self.tolerance}")
        if self.l2_penalty < 0:
            raise PredictorError(f"l2_penalty must be non-negative, got {self.l2_penalty}")


@dataclass
class LogisticModel:
    bias: float
    w_success: float
    w_skip: float
    iterations: int = 0
    final_loss: float = float("nan")
    loss_history: list[float] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("bias", "w_success", "w_skip"):
            if not math.isfinite(getattr(self, name)):
                raise PredictorError(f"model parameter {name} is not finite")


def sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    # Branch on sign to avoid exp overflow at large |z|.
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def build_training_set(log: EventLog) -> list[TrainingPoint]:
    """One point per encounter, features frozen at the encounter's first event.

    A single in-order pass per student: the tracker snapshot taken when an
    exercise first appears equals features_at(log, student, topic, first_seq);
    labels come from the finished encounters.
    """
    points: list[TrainingPoint] = []
    for student_id in log.student_ids():
        events = log.events_for(student_id)
        tracker = FeatureTracker()
        snapshots: dict[str, tuple[StudentFeatures, int]] = {}
        for event in events:
            if tracker.is_new_exercise(event.exercise_id):
                snapshots[event.exercise_id] = (tracker.features(event.topic_id), event.seq)
            tracker.observe(event)
        for enc in group_encounters(events):
            feats, first_seq = snapshots[enc.exercise_id]
            points.append(
                TrainingPoint(
                    features=feats,
                    label=enc.eventual_success,
                    student_id=student_id,
                    topic_id=enc.topic_id,
                    exercise_id=enc.exercise_id,
                    first_seq=first_seq,
                )
            )
    return points


def _design_matrix(points: list[TrainingPoint]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array(
        [(p.features.topic_success, p.features.topic_skip) for p in points], dtype=np.float64
    )
    y = np.array([1.0 if p.label else 0.0 for p in points], dtype=np.float64)
    return X, y


def _loss_value(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2_penalty: float) -> float:
    z = theta[0] + X @ theta[1:]
    # mean of softplus(z) - y*z, the stable form of the negative log-likelihood
    nll = float(np.mean(np.logaddexp(0.0, z) - y * z))
    return nll + 0.5 * l2_penalty * float(theta[1] ** 2 + theta[2] ** 2)


def _gradient(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2_penalty: float) -> np.ndarray:
    z = theta[0] + X @ theta[1:]
    residual = sigmoid(z) - y
    grad = np.empty(3, dtype=np.float64)
    grad[0] = float(np.mean(residual))
    grad[1:] = (X.T @ residual) / len(y) + l2_penalty * theta[1:]
    return grad


def train(
    points: list[TrainingPoint],
    config: TrainConfig = TrainConfig(),
    track_loss: bool = False,
) -> LogisticModel:
    """Gradient descent from zeros; stops once the loss change drops below tolerance."""
    if not points:
        raise PredictorError("cannot train on an empty point list")
    labels = {p.label for p in points}
    if len(labels) < 2:
        only = labels.pop()
        raise PredictorError(
            f"degenerate training set: every label is {only}; both classes are required"
        )
    X, y = _design_matrix(points)
    theta = np.zeros(3, dtype=np.float64)
    history: list[float] = []
    prev_loss = _loss_value(theta, X, y, config.l2_penalty)
    if track_loss:
        history.append(prev_loss)
    iterations = 0
    for _ in range(config.max_iterations):
        theta = theta - config.learning_rate * _gradient(theta, X, y, config.l2_penalty)
        iterations += 1
        loss = _loss_value(theta, X, y, config.l2_penalty)
        if track_loss:
            history.append(loss)
        if abs(prev_loss - loss) < config.tolerance:
            prev_loss = loss
            break
        prev_loss = loss
    return LogisticModel(
        bias=float(theta[0]),
        w_success=float(theta[1]),
        w_skip=float(theta[2]),
        iterations=iterations,
        final_loss=prev_loss,
        loss_history=history if track_loss else None,
    )


def predict(model: LogisticModel, features: StudentFeatures) -> float:
    for name, value in (("topic_success", features.topic_success), ("topic_skip", features.topic_skip)):
        if not math.isfinite(value):
            raise PredictorError(f"feature {name} is not finite: {value}")
    z = model.bias + model.w_success * features.topic_success + model.w_skip * features.topic_skip
    return float(sigmoid(z))


def accuracy(model: LogisticModel, points: list[TrainingPoint], threshold: float = 0.5) -> float:
    """Fraction of points where (prediction >= threshold) matches the label."""
    if not points:
        raise PredictorError("cannot score an empty point list")
    hits = sum(
        1 for p in points if (predict(model, p.features) >= threshold) == p.label
    )
    return hits / len(points)


def loss(model: LogisticModel, points: list[TrainingPoint], l2_penalty: float = 0.0) -> float:
    if not points:
        raise PredictorError("cannot evaluate loss on an empty point list")
    X, y = _design_matrix(points)
    return _loss_value(np.array([model.bias, model.w_success, model.w_skip]), X, y, l2_penalty)


def loss_gradient(
    model: LogisticModel, points: list[TrainingPoint], l2_penalty: float = 0.0
) -> np.ndarray:
    """Analytic gradient of the regularized mean NLL, ordered (bias, w_success, w_skip)."""
    if not points:
        raise PredictorError("cannot evaluate gradient on an empty point list")
    X, y = _design_matrix(points)
    return _gradient(np.array([model.bias, model.w_success, model.w_skip]), X, y, l2_penalty)


def split_by_student(
    points: list[TrainingPoint], seed: int, train_fraction: float = 0.8
) -> tuple[list[TrainingPoint], list[TrainingPoint]]:
    """Seeded split where no student's points straddle the boundary."""
    if not 0.0 < train_fraction < 1.0:
        raise PredictorError(f"train_fraction must be in (0, 1), got {train_fraction}")
    students = sorted({p.student_id for p in points})
    rng = np.random.default_rng(seed)
    rng.shuffle(students)
    cut = int(round(train_fraction * len(students)))
    train_students = set(students[:cut])
    train_points = [p for p in points if p.student_id in train_students]
    test_points = [p for p in points if p.student_id not in train_students]
    return train_points, test_points


def model_to_dict(model: LogisticModel, config: TrainConfig | None = None) -> dict:
    return {
        "bias": model.bias,
        "w_success": model.w_success,
        "w_skip": model.w_skip,
        "iterations": model.iterations,
        "final_loss": model.final_loss,
        "config": {
            "learning_rate": config.learning_rate,
            "max_iterations": config.max_iterations,
            "tolerance": config.tolerance,
            "l2_penalty": config.l2_penalty,
        }
        if config
        else None,
    }


def save_model(model: LogisticModel, path: str | Path, config: TrainConfig | None = None) -> None:
    # json round-trips Python floats exactly (repr is shortest-exact), so the
    # decimal form loses nothing.
    Path(path).write_text(
        json.dumps(model_to_dict(model, config), indent=2) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> tuple[LogisticModel, TrainConfig | None]:
    path = Path(path)
    if not path.exists():
        raise PredictorError(f"model file not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    try:
        model = LogisticModel(
            bias=float(payload["bias"]),
            w_success=float(payload["w_success"]),
            w_skip=float(payload["w_skip"]),
            iterations=int(payload["iterations"]),
            final_loss=float(payload["final_loss"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise PredictorError(f"malformed model file {path}: {exc}") from exc
    config = None
    if payload.get("config"):
        cfg = payload["config"]
        config = TrainConfig(
            learning_rate=cfg["learning_rate"],
            max_iterations=cfg["max_iterations"],
            tolerance=cfg["tolerance"],
            l2_penalty=cfg["l2_penalty"],
        )
    return model, config


def model_hash(model: LogisticModel) -> str:
    payload = json.dumps(
        {"bias": model.bias, "w_success": model.w_success, "w_skip": model.w_skip},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]
