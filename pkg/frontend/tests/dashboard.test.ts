import { beforeEach, describe, expect, it } from "vitest";

import defaultSeed0 from "../fixtures/report-default-seed0.json";
import twoArm from "../fixtures/report-two-arm.json";
import threeArmSmall from "../fixtures/report-three-arm.json";
import { renderDashboard } from "../src/dashboard";
import { METRICS, type Metric, type ReportPayload } from "../src/types";

const DEFAULT_SEED0 = defaultSeed0 as unknown as ReportPayload;
const TWO_ARM = twoArm as unknown as ReportPayload;
const THREE_ARM_SMALL = threeArmSmall as unknown as ReportPayload;

function expectedStars(payload: ReportPayload): Set<Metric> {
  const stars = new Set<Metric>();
  for (const test of payload.pairwise_tests) {
    const pair = [test.arm_a, test.arm_b].sort().join("|");
    if (pair === "expected|non_expected" && test.significant) stars.add(test.metric);
  }
  return stars;
}

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<div id="dashboard"></div>';
  root = document.getElementById("dashboard")!;
});

describe("dashboard rendering", () => {
  it("stars exactly the metrics whose expected-vs-non_expected test is significant", () => {
    for (const payload of [DEFAULT_SEED0, TWO_ARM, THREE_ARM_SMALL]) {
      renderDashboard(root, payload);
      const headers = [...root.querySelectorAll("th")].map((th) => th.textContent);
      const stars = expectedStars(payload);
      expect(headers[1]).toBe("Solution Acceptance" + (stars.has("solution_acceptance") ? "*" : ""));
      expect(headers[2]).toBe("Ultimate Failure Rate" + (stars.has("ultimate_failure_rate") ? "*" : ""));
      expect(headers[3]).toBe("Skip Rate" + (stars.has("skip_rate") ? "*" : ""));
    }
  });

  it("renders the recorded table-shaped payload with stars on acceptance and failure", () => {
    // the default seed-0 run reproduces the reference shape: both starred
    renderDashboard(root, DEFAULT_SEED0);
    const headers = [...root.querySelectorAll("th")].map((th) => th.textContent);
    expect(headers).toEqual([
      "Experiment Group",
      "Solution Acceptance*",
      "Ultimate Failure Rate*",
      "Skip Rate",
      "n",
    ]);
  });

  it("orders rows expected, non-expected, control", () => {
    renderDashboard(root, DEFAULT_SEED0);
    const rows = [...root.querySelectorAll("tr[data-group]")].map(
      (tr) => (tr as HTMLElement).dataset.group,
    );
    expect(rows).toEqual(["expected", "non_expected", "control"]);
  });

  it("shows every cell verbatim from the payload rounded to 3 decimals", () => {
    renderDashboard(root, DEFAULT_SEED0);
    for (const group of DEFAULT_SEED0.groups) {
      const tr = root.querySelector(`tr[data-group="${group.group}"]`)!;
      const cells = [...tr.querySelectorAll("td")].map((td) => td.textContent);
      expect(cells).toHaveLength(5);
      for (const [i, metric] of METRICS.entries()) {
        const cell = group.metrics[metric];
        expect(cells[i + 1]).toBe(
          `${cell.value.toFixed(3)} ± ${cell.halfwidth!.toFixed(3)}`,
        );
      }
      expect(cells[4]).toBe(String(group.n));
    }
  });

  it("lists a pairwise test entry per payload test with matching markers", () => {
    renderDashboard(root, TWO_ARM);
    const items = [...root.querySelectorAll(".pairwise-tests li")];
    expect(items).toHaveLength(TWO_ARM.pairwise_tests.length);
    for (const [i, test] of TWO_ARM.pairwise_tests.entries()) {
      const text = items[i]!.textContent!;
      expect(text.endsWith("*")).toBe(test.significant);
      expect(text).toContain(`p = ${test.p.toFixed(3)}`);
    }
  });

  it("handles a degenerate infinite-t test (null on the wire)", () => {
    const degenerate = TWO_ARM.pairwise_tests.find((t) => t.t === null);
    expect(degenerate).toBeDefined();
    renderDashboard(root, TWO_ARM);
    const texts = [...root.querySelectorAll(".pairwise-tests li")].map(
      (li) => li.textContent,
    );
    expect(texts.some((t) => t!.includes("t = inf"))).toBe(true);
  });

  it("re-rendering the identical payload produces identical DOM", () => {
    renderDashboard(root, DEFAULT_SEED0);
    const first = root.innerHTML;
    renderDashboard(root, DEFAULT_SEED0);
    expect(root.innerHTML).toBe(first);
  });

  it("renders an explicit empty state when there is no data", () => {
    renderDashboard(root, null, "insufficient data for a report");
    expect(root.querySelector("table")).toBeNull();
    expect(root.querySelector(".dashboard-empty")!.textContent).toBe(
      "insufficient data for a report",
    );
  });

  it("performs no metric computation: touched numbers all exist in the payload", () => {
    renderDashboard(root, THREE_ARM_SMALL);
    const shown = (root.textContent!.match(/-?\d+\.\d{3}/g) ?? []).map(Number);
    const payloadNumbers = new Set<string>();
    for (const group of THREE_ARM_SMALL.groups) {
      for (const metric of METRICS) {
        payloadNumbers.add(group.metrics[metric].value.toFixed(3));
        const hw = group.metrics[metric].halfwidth;
        if (hw !== null) payloadNumbers.add(hw.toFixed(3));
      }
    }
    for (const test of THREE_ARM_SMALL.pairwise_tests) {
      if (test.t !== null) payloadNumbers.add(test.t.toFixed(3));
      payloadNumbers.add(test.p.toFixed(3));
    }
    payloadNumbers.add(THREE_ARM_SMALL.alpha.toFixed(3));
    for (const value of shown) {
      expect(payloadNumbers.has(value.toFixed(3))).toBe(true);
    }
  });
});
