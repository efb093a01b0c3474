"""Per-arm outcome metrics, pairwise Student's t-tests, and subgroup reductions.

Unit of analysis is the student: each student yields one value per metric,
arms are compared on those per-student values. The p-value comes from our own
regularized incomplete beta so library routines stay available as an
independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence

from .assignment import GROUPS, ExperimentGroup
from .bank import Level
from .history import (
    PHASE_EXPERIMENT,
    AttemptEvent,
    AttemptOutcome,
    Encounter,
    EventLog,
    group_encounters,
)


class AnalyticsError(ValueError):
    pass


METRICS = ("solution_acceptance", "ultimate_failure_rate", "skip_rate")

# Reference three-arm results the simulator is calibrated to reproduce qualitatively;
# kept as reference anchors for calibration tests, not asserted exactly.
REFERENCE_GROUP_METRICS = {
    ExperimentGroup.EXPECTED: {
        "solution_acceptance": 0.626,
        "ultimate_failure_rate": 0.163,
        "skip_rate": 0.105,
        "n": 190,
    },
    ExperimentGroup.NON_EXPECTED: {
        "solution_acceptance": 0.468,
        "ultimate_failure_rate": 0.295,
        "skip_rate": 0.144,
        "n": 139,
    },
    ExperimentGroup.CONTROL: {
        "solution_acceptance": 0.596,
        "ultimate_failure_rate": 0.191,
        "skip_rate": 0.121,
        "n": 141,
    },
}


# --- per-student metrics -------------------------------------------------


def solution_acceptance(events: Sequence[AttemptEvent]) -> float:
    """Accepted attempts over non-skip attempts for one student."""
    attempts = [e for e in events if e.outcome is not AttemptOutcome.SKIPPED]
    if not attempts:
        raise AnalyticsError("student has no non-skip attempts")
    accepted = sum(1 for e in attempts if e.outcome is AttemptOutcome.ACCEPTED)
    return accepted / len(attempts)


def ultimate_failure_rate(encs: Sequence[Encounter]) -> float:
    """Encounters never accepted and never skipped, over all encounters."""
    if not encs:
        raise AnalyticsError("student has no encounters")
    return sum(1 for e in encs if e.ultimate_failure) / len(encs)


def skip_rate(encs: Sequence[Encounter]) -> float:
    if not encs:
        raise AnalyticsError("student has no encounters")
    return sum(1 for e in encs if e.skipped) / len(encs)


def success_fraction(encs: Sequence[Encounter]) -> float:
    if not encs:
        raise AnalyticsError("student has no encounters")
    return sum(1 for e in encs if e.eventual_success) / len(encs)


# --- Student's t-test -----------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter = 300
    eps = 1e-15
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise AnalyticsError(f"incomplete beta failed to converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise AnalyticsError(f"incomplete beta requires positive a, b; got {a}, {b}")
    if not 0.0 <= x <= 1.0:
        raise AnalyticsError(f"incomplete beta requires x in [0, 1]; got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_p_value(t: float, df: float) -> float:
    """Two-sided p-value for a Student's t statistic.

    Uses the complement I_y(1/2, df/2) with y = t^2/(df + t^2): the direct
    form I_{df/(df+t^2)}(df/2, 1/2) evaluates at x -> 1 where the integrand
    is singular and forming x loses the tail to cancellation for tiny t.
    """
    if df <= 0:
        raise AnalyticsError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    t2 = t * t
    return 1.0 - regularized_incomplete_beta(0.5, df / 2.0, t2 / (df + t2))


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    significant: bool
    degenerate: bool = False


def two_sample_t_test(
    a: Sequence[float], b: Sequence[float], alpha: float = 0.05
) -> TTestResult:
    """Pooled-variance (classical Student's) two-sample t-test, two-sided."""
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise AnalyticsError(f"each sample needs at least 2 values, got {na} and {nb}")
    mean_a = sum(a) / na
    mean_b = sum(b) / nb
    ss_a = sum((x - mean_a) ** 2 for x in a)
    ss_b = sum((x - mean_b) ** 2 for x in b)
    df = na + nb - 2
    pooled_var = (ss_a + ss_b) / df
    if pooled_var == 0.0:
        if mean_a == mean_b:
            return TTestResult(0.0, df, 1.0, False, degenerate=True)
        t = math.inf if mean_a > mean_b else -math.inf
        return TTestResult(t, df, 0.0, 0.0 < alpha, degenerate=True)
    t = (mean_a - mean_b) / math.sqrt(pooled_var * (1.0 / na + 1.0 / nb))
    p = student_t_p_value(t, df)
    return TTestResult(t, df, p, p < alpha)


# --- arm-level report -----------------------------------------------------


@dataclass(frozen=True)
class GroupMetrics:
    group: ExperimentGroup
    solution_acceptance: float
    ultimate_failure_rate: float
    skip_rate: float
    n: int
    halfwidths: dict[str, float]
    metric_ns: dict[str, int]


@dataclass(frozen=True)
class PairwiseTest:
    metric: str
    arm_a: ExperimentGroup
    arm_b: ExperimentGroup
    result: TTestResult


@dataclass(frozen=True)
class ExperimentReport:
    alpha: float
    groups: list[GroupMetrics]
    pairwise: list[PairwiseTest]
    excluded_students: list[str]


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _halfwidth(values: Sequence[float]) -> float:
    """95% normal-approximation interval half-width, 1.96 * s / sqrt(n)."""
    n = len(values)
    if n < 2:
        return float("nan")
    mean = _mean(values)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return 1.96 * math.sqrt(var) / math.sqrt(n)


def per_student_metric_values(
    log: EventLog, phases: tuple[str, ...] = (PHASE_EXPERIMENT,)
) -> tuple[dict[ExperimentGroup, dict[str, list[float]]], list[str]]:
    """Per-student metric values grouped by arm, plus students excluded from
    the acceptance metric for having only skips."""
    values: dict[ExperimentGroup, dict[str, list[float]]] = {
        g: {m: [] for m in METRICS} for g in GROUPS
    }
    excluded: list[str] = []
    scoped = log.subset(lambda e: e.phase in phases)
    for student_id in scoped.student_ids():
        events = scoped.events_for(student_id)
        by_group: dict[ExperimentGroup, list[AttemptEvent]] = {}
        for event in events:
            by_group.setdefault(event.group, []).append(event)
        for group, group_events in by_group.items():
            encs = group_encounters(group_events)
            values[group]["ultimate_failure_rate"].append(ultimate_failure_rate(encs))
            values[group]["skip_rate"].append(skip_rate(encs))
            try:
                values[group]["solution_acceptance"].append(solution_acceptance(group_events))
            except AnalyticsError:
                excluded.append(student_id)
    return values, excluded


def group_report(
    log: EventLog, alpha: float = 0.05, phases: tuple[str, ...] = (PHASE_EXPERIMENT,)
) -> ExperimentReport:
    if not 0.0 < alpha < 1.0:
        raise AnalyticsError(f"alpha must be in (0, 1), got {alpha}")
    values, excluded = per_student_metric_values(log, phases)
    present = [g for g in GROUPS if values[g]["ultimate_failure_rate"]]
    if not present:
        raise AnalyticsError("log contains no events in the requested phases")
    for group in present:
        n = len(values[group]["ultimate_failure_rate"])
        if n < 2:
            raise AnalyticsError(f"arm {group.value} has fewer than 2 students ({n})")
    groups = []
    for group in present:
        sample = values[group]
        groups.append(
            GroupMetrics(
                group=group,
                solution_acceptance=_mean(sample["solution_acceptance"]),
                ultimate_failure_rate=_mean(sample["ultimate_failure_rate"]),
                skip_rate=_mean(sample["skip_rate"]),
                n=len(sample["ultimate_failure_rate"]),
                halfwidths={m: _halfwidth(sample[m]) for m in METRICS},
                metric_ns={m: len(sample[m]) for m in METRICS},
            )
        )
    pairwise = []
    for metric in METRICS:
        for i, arm_a in enumerate(present):
            for arm_b in present[i + 1 :]:
                sample_a = values[arm_a][metric]
                sample_b = values[arm_b][metric]
                if len(sample_a) < 2 or len(sample_b) < 2:
                    continue
                pairwise.append(
                    PairwiseTest(
                        metric=metric,
                        arm_a=arm_a,
                        arm_b=arm_b,
                        result=two_sample_t_test(sample_a, sample_b, alpha),
                    )
                )
    return ExperimentReport(alpha=alpha, groups=groups, pairwise=pairwise, excluded_students=excluded)


# --- subgroup relative reductions ----------------------------------------


@dataclass(frozen=True)
class SubgroupReport:
    level: Level
    arm_a: ExperimentGroup
    arm_b: ExperimentGroup
    n_a: int
    n_b: int
    metrics_a: dict[str, float]
    metrics_b: dict[str, float]
    relative_reductions: dict[str, float]


def subgroup_report(
    log: EventLog,
    level: Level,
    arms: tuple[ExperimentGroup, ExperimentGroup] = (
        ExperimentGroup.EXPECTED,
        ExperimentGroup.CONTROL,
    ),
    alpha: float = 0.05,
    phases: tuple[str, ...] = (PHASE_EXPERIMENT,),
) -> SubgroupReport:
    """Relative reductions (b - a) / b over encounters the model scored at `level`.

    An encounter enters the subgroup when its recorded assigned level matches,
    so each student contributes exactly the exercises assigned at that level.
    """
    arm_a, arm_b = arms
    scoped = log.subset(
        lambda e: e.phase in phases
        and e.assigned_level is level
        and e.group in (arm_a, arm_b)
    )
    per_arm_values: dict[ExperimentGroup, dict[str, list[float]]] = {
        arm: {m: [] for m in METRICS} for arm in arms
    }
    for student_id in scoped.student_ids():
        events = scoped.events_for(student_id)
        by_group: dict[ExperimentGroup, list[AttemptEvent]] = {}
        for event in events:
            by_group.setdefault(event.group, []).append(event)
        for group, group_events in by_group.items():
            encs = group_encounters(group_events)
            per_arm_values[group]["ultimate_failure_rate"].append(ultimate_failure_rate(encs))
            per_arm_values[group]["skip_rate"].append(skip_rate(encs))
            try:
                per_arm_values[group]["solution_acceptance"].append(
                    solution_acceptance(group_events)
                )
            except AnalyticsError:
                pass
    n_a = len(per_arm_values[arm_a]["ultimate_failure_rate"])
    n_b = len(per_arm_values[arm_b]["ultimate_failure_rate"])
    if n_a == 0 or n_b == 0:
        raise AnalyticsError(
            f"empty {level.label} subgroup: {arm_a.value} has {n_a} students, "
            f"{arm_b.value} has {n_b}"
        )
    metrics_a = {m: _mean(v) if (v := per_arm_values[arm_a][m]) else float("nan") for m in METRICS}
    metrics_b = {m: _mean(v) if (v := per_arm_values[arm_b][m]) else float("nan") for m in METRICS}
    reductions: dict[str, float] = {}
    for metric in METRICS:
        if metrics_b[metric] == 0.0:
            raise AnalyticsError(
                f"relative reduction undefined: {arm_b.value} {metric} is zero in the subgroup"
            )
        reductions[metric] = (metrics_b[metric] - metrics_a[metric]) / metrics_b[metric]
    return SubgroupReport(
        level=level,
        arm_a=arm_a,
        arm_b=arm_b,
        n_a=n_a,
        n_b=n_b,
        metrics_a=metrics_a,
        metrics_b=metrics_b,
        relative_reductions=reductions,
    )


# --- rendering ------------------------------------------------------------


def _json_number(value: float) -> float | None:
    return value if math.isfinite(value) else None


def report_to_dict(report: ExperimentReport) -> dict:
    """Wire form of the report; non-finite values (infinite t on degenerate
    tests) become null so the payload stays strict-JSON."""
    return {
        "alpha": report.alpha,
        "groups": [
            {
                "group": g.group.value,
                "n": g.n,
                "metrics": {
                    m: {
                        "value": getattr(g, m),
                        "halfwidth": _json_number(g.halfwidths[m]),
                        "n": g.metric_ns[m],
                    }
                    for m in METRICS
                },
            }
            for g in report.groups
        ],
        "pairwise_tests": [
            {
                "metric": t.metric,
                "arm_a": t.arm_a.value,
                "arm_b": t.arm_b.value,
                "t": _json_number(t.result.t_statistic),
                "df": t.result.degrees_of_freedom,
                "p": t.result.p_value,
                "significant": t.result.significant,
                "degenerate": t.result.degenerate,
            }
            for t in report.pairwise
        ],
        "excluded_students": report.excluded_students,
    }


def subgroup_to_dict(report: SubgroupReport) -> dict:
    return {
        "level": report.level.label,
        "arm_a": report.arm_a.value,
        "arm_b": report.arm_b.value,
        "n_a": report.n_a,
        "n_b": report.n_b,
        "metrics_a": {m: _json_number(v) for m, v in report.metrics_a.items()},
        "metrics_b": {m: _json_number(v) for m, v in report.metrics_b.items()},
        "relative_reductions": {
            m: _json_number(v) for m, v in report.relative_reductions.items()
        },
    }


def _significant_metrics(report: ExperimentReport) -> set[str]:
    """Metrics whose Expected-vs-NonExpected test is significant (table asterisks)."""
    marked = set()
    for test in report.pairwise:
        if {test.arm_a, test.arm_b} == {ExperimentGroup.EXPECTED, ExperimentGroup.NON_EXPECTED}:
            if test.result.significant:
                marked.add(test.metric)
    return marked


def render_table(report: ExperimentReport) -> str:
    marked = _significant_metrics(report)
    headers = ["Experiment Group"] + [
        {
            "solution_acceptance": "Solution Acceptance",
            "ultimate_failure_rate": "Ultimate Failure Rate",
            "skip_rate": "Skip Rate",
        }[m]
        + ("*" if m in marked else "")
        for m in METRICS
    ] + ["n"]
    rows = [headers]
    order = {g: i for i, g in enumerate(GROUPS)}
    for g in sorted(report.groups, key=lambda g: order[g.group]):
        rows.append(
            [
                g.group.value,
                *(f"{getattr(g, m):.3f} ± {g.halfwidths[m]:.3f}" for m in METRICS),
                str(g.n),
            ]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    lines.append("")
    lines.append(f"Pairwise Student's t-tests (alpha = {report.alpha:g}):")
    for test in report.pairwise:
        r = test.result
        lines.append(
            f"  {test.metric}: {test.arm_a.value} vs {test.arm_b.value}: "
            f"t = {r.t_statistic:.4f}, df = {r.degrees_of_freedom:g}, "
            f"p = {r.p_value:.6f}{' *' if r.significant else ''}"
        )
    return "\n".join(lines) + "\n"


def render_csv(report: ExperimentReport) -> str:
    lines = ["group,metric,value,halfwidth,n"]
    for g in report.groups:
        for m in METRICS:
            lines.append(f"{g.group.value},{m},{getattr(g, m)!r},{g.halfwidths[m]!r},{g.metric_ns[m]}")
    lines.append("")
    lines.append("metric,arm_a,arm_b,t,df,p,significant")
    for t in report.pairwise:
        r = t.result
        lines.append(
            f"{t.metric},{t.arm_a.value},{t.arm_b.value},"
            f"{r.t_statistic!r},{r.degrees_of_freedom!r},{r.p_value!r},{str(r.significant).lower()}"
        )
    return "\n".join(lines) + "\n"
