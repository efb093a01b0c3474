import {
  ARM_LABELS,
  ARM_ORDER,
  METRIC_LABELS,
  METRICS,
  type Metric,
  type ReportPayload,
} from "./types";

// Pure rendering: the table is a deterministic function of the payload, and
// every number shown is a payload field rounded to 3 decimals for display.

function starredMetrics(payload: ReportPayload): Set<Metric> {
  const marked = new Set<Metric>();
  for (const test of payload.pairwise_tests) {
    const pair = [test.arm_a, test.arm_b].sort().join("|");
    if (pair === "expected|non_expected" && test.significant) {
      marked.add(test.metric);
    }
  }
  return marked;
}

function cellText(value: number, halfwidth: number | null): string {
  return halfwidth === null
    ? value.toFixed(3)
    : `${value.toFixed(3)} ± ${halfwidth.toFixed(3)}`;
}

export function renderDashboard(
  root: HTMLElement,
  payload: ReportPayload | null,
  emptyDetail = "no experiment data yet",
): void {
  root.textContent = "";
  if (payload === null || payload.groups.length === 0) {
    const empty = document.createElement("p");
    empty.className = "dashboard-empty";
    empty.textContent = emptyDetail;
    root.appendChild(empty);
    return;
  }

  const marked = starredMetrics(payload);
  const table = document.createElement("table");
  table.className = "report-table";

  const header = document.createElement("tr");
  for (const title of [
    "Experiment Group",
    ...METRICS.map((m) => METRIC_LABELS[m] + (marked.has(m) ? "*" : "")),
    "n",
  ]) {
    const th = document.createElement("th");
    th.textContent = title;
    header.appendChild(th);
  }
  table.appendChild(header);

  const rows = [...payload.groups].sort(
    (a, b) => ARM_ORDER.indexOf(a.group) - ARM_ORDER.indexOf(b.group),
  );
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.dataset.group = row.group;
    const name = document.createElement("td");
    name.textContent = ARM_LABELS[row.group] ?? row.group;
    tr.appendChild(name);
    for (const metric of METRICS) {
      const cell = row.metrics[metric];
      const td = document.createElement("td");
      td.dataset.metric = metric;
      td.textContent = cellText(cell.value, cell.halfwidth);
      tr.appendChild(td);
    }
    const n = document.createElement("td");
    n.textContent = String(row.n);
    tr.appendChild(n);
    table.appendChild(tr);
  }
  root.appendChild(table);

  const caption = document.createElement("p");
  caption.className = "report-caption";
  caption.textContent =
    `Metrics marked with * differ significantly between the Expected and ` +
    `Non-Expected groups at alpha = ${payload.alpha}.`;
  root.appendChild(caption);

  const tests = document.createElement("ul");
  tests.className = "pairwise-tests";
  for (const test of payload.pairwise_tests) {
    const li = document.createElement("li");
    const t = test.t === null ? "inf" : test.t.toFixed(3);
    li.textContent =
      `${METRIC_LABELS[test.metric]}: ${ARM_LABELS[test.arm_a] ?? test.arm_a} vs ` +
      `${ARM_LABELS[test.arm_b] ?? test.arm_b}: t = ${t}, p = ${test.p.toFixed(3)}` +
      (test.significant ? " *" : "");
    tests.appendChild(li);
  }
  root.appendChild(tests);
}
