import { ApiError, HttpClient } from "./api";
import { renderDashboard } from "./dashboard";
import { SessionMachine, type MachineSnapshot } from "./machine";
import { renderProfile, renderSession } from "./session";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "";
const client = new HttpClient(baseUrl);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const studentInput = el<HTMLInputElement>("student-id");
const startButton = el<HTMLButtonElement>("start");
const nextButton = el<HTMLButtonElement>("next");
const answerInput = el<HTMLInputElement>("answer");
const answerButton = el<HTMLButtonElement>("submit-answer");
const skipButton = el<HTMLButtonElement>("skip");
const sessionRoot = el<HTMLElement>("session");
const profileRoot = el<HTMLElement>("profile");
const dashboardRoot = el<HTMLElement>("dashboard");
const refreshReport = el<HTMLButtonElement>("refresh-report");

function sync(snapshot: MachineSnapshot): void {
  startButton.disabled = !machine.canStart();
  nextButton.disabled = !machine.canNext();
  answerButton.disabled = !machine.canAnswer();
  skipButton.disabled = !machine.canSkip();
  answerInput.disabled = !machine.canAnswer();
  renderSession(sessionRoot, snapshot);
  renderProfile(profileRoot, snapshot);
}

const machine = new SessionMachine(client, sync);
sync(machine.snapshot());

startButton.addEventListener("click", () => {
  const studentId = studentInput.value.trim();
  if (studentId) void machine.start(studentId);
});

nextButton.addEventListener("click", () => void machine.next());

answerButton.addEventListener("click", () => {
  void machine.answer(answerInput.value).then(() => {
    answerInput.value = "";
  });
});

answerInput.addEventListener("keydown", (event) => {
  if (event.key === "Enter" && !answerButton.disabled) {
    answerButton.click();
  }
});

skipButton.addEventListener("click", () => void machine.skip());

async function loadReport(): Promise<void> {
  try {
    renderDashboard(dashboardRoot, await client.getReport(0.05));
  } catch (err) {
    const detail =
      err instanceof ApiError ? err.detail : "experiment report unavailable";
    renderDashboard(dashboardRoot, null, detail);
  }
}

refreshReport.addEventListener("click", () => void loadReport());
void loadReport();
