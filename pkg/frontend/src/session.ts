import type { MachineSnapshot } from "./machine";
import { ARM_LABELS } from "./types";

// Session panel rendering: a verbatim view of the machine snapshot, which in
// turn holds only the last service responses.

export function renderSession(root: HTMLElement, snapshot: MachineSnapshot): void {
  root.textContent = "";

  if (snapshot.error) {
    const banner = document.createElement("p");
    banner.className = "error-banner";
    banner.textContent = snapshot.error;
    root.appendChild(banner);
  }

  if (snapshot.session) {
    const arm = document.createElement("p");
    arm.className = "arm-label";
    arm.textContent =
      `Session ${snapshot.session.session_id} · arm: ` +
      (ARM_LABELS[snapshot.session.group] ?? snapshot.session.group);
    root.appendChild(arm);
  }

  if (snapshot.phase === "exercising" && snapshot.exercise) {
    const badge = document.createElement("span");
    badge.className = `level-badge level-${snapshot.exercise.shown_level}`;
    badge.textContent = snapshot.exercise.shown_level;
    root.appendChild(badge);

    const question = document.createElement("p");
    question.className = "question-text";
    question.textContent = snapshot.exercise.text;
    root.appendChild(question);

    if (snapshot.attemptsRemaining !== null) {
      const attempts = document.createElement("p");
      attempts.className = "attempts";
      attempts.textContent = `attempts remaining: ${snapshot.attemptsRemaining}`;
      root.appendChild(attempts);
    }
  }

  if (snapshot.lastGrade) {
    const feedback = document.createElement("p");
    feedback.className = `feedback feedback-${snapshot.lastGrade.outcome}`;
    feedback.textContent =
      snapshot.lastGrade.outcome === "accepted" ? "Accepted" : "Rejected";
    root.appendChild(feedback);
  }

  if (snapshot.phase === "finished") {
    const done = document.createElement("p");
    done.className = "finished";
    done.textContent = "No more questions available for this student.";
    root.appendChild(done);
  }
}

export function renderProfile(root: HTMLElement, snapshot: MachineSnapshot): void {
  root.textContent = "";
  const profile = snapshot.profile;
  if (!profile) {
    return;
  }
  const summary = document.createElement("p");
  summary.className = "profile-summary";
  const probability =
    profile.probability === null ? "n/a" : profile.probability.toFixed(3);
  const assigned = profile.assigned_level ?? "n/a";
  summary.textContent =
    `predicted success: ${probability} · assigned level: ${assigned}`;
  root.appendChild(summary);

  const table = document.createElement("table");
  table.className = "profile-table";
  const header = document.createElement("tr");
  for (const title of ["Topic", "Success", "Skip", "Encounters"]) {
    const th = document.createElement("th");
    th.textContent = title;
    header.appendChild(th);
  }
  table.appendChild(header);
  for (const [topic, features] of Object.entries(profile.features)) {
    const tr = document.createElement("tr");
    for (const text of [
      topic,
      features.success.toFixed(3),
      features.skip.toFixed(3),
      String(features.prior_encounters),
    ]) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  root.appendChild(table);
}
