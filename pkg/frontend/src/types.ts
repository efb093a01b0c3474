// Wire types mirroring the session service JSON exactly. The client renders
// these fields verbatim; it never derives a metric itself.

export type Metric = "solution_acceptance" | "ultimate_failure_rate" | "skip_rate";

export const METRICS: Metric[] = [
  "solution_acceptance",
  "ultimate_failure_rate",
  "skip_rate",
];

export const METRIC_LABELS: Record<Metric, string> = {
  solution_acceptance: "Solution Acceptance",
  ultimate_failure_rate: "Ultimate Failure Rate",
  skip_rate: "Skip Rate",
};

export const ARM_ORDER = ["expected", "non_expected", "control"];

export const ARM_LABELS: Record<string, string> = {
  expected: "Expected",
  non_expected: "Non-Expected",
  control: "Control",
};

export interface MetricCell {
  value: number;
  halfwidth: number | null;
  n: number;
}

export interface GroupRow {
  group: string;
  n: number;
  metrics: Record<Metric, MetricCell>;
}

export interface PairwiseTest {
  metric: Metric;
  arm_a: string;
  arm_b: string;
  t: number | null;
  df: number;
  p: number;
  significant: boolean;
  degenerate: boolean;
}

export interface ReportPayload {
  alpha: number;
  groups: GroupRow[];
  pairwise_tests: PairwiseTest[];
  excluded_students: string[];
}

export interface SessionInfo {
  session_id: string;
  group: string;
}

export interface NextExercise {
  exercise_id: string;
  shown_level: string;
  text: string;
}

export interface GradeResult {
  outcome: "accepted" | "rejected";
  attempts_remaining: number;
  exercise_closed: boolean;
}

export interface TopicFeatures {
  success: number;
  skip: number;
  prior_encounters: number;
}

export interface Profile {
  features: Record<string, TopicFeatures>;
  probability: number | null;
  assigned_level: string | null;
  group: string;
}
