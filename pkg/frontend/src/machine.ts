import { ApiError, type ServiceClient } from "./api";
import type { GradeResult, NextExercise, Profile, SessionInfo } from "./types";

// The session flow is a strict state machine so the client can never issue an
// illegal request sequence: `next` only when no exercise is open, answer/skip
// only while one is, and never more than one in-flight mutating request.

export type Phase = "idle" | "ready" | "exercising" | "finished";

export interface MachineSnapshot {
  phase: Phase;
  busy: boolean;
  session: SessionInfo | null;
  exercise: NextExercise | null;
  attemptsRemaining: number | null;
  lastGrade: GradeResult | null;
  profile: Profile | null;
  error: string | null;
}

type Listener = (snapshot: MachineSnapshot) => void;

export class SessionMachine {
  private phase: Phase = "idle";
  private busy = false;
  private session: SessionInfo | null = null;
  private exercise: NextExercise | null = null;
  private attemptsRemaining: number | null = null;
  private lastGrade: GradeResult | null = null;
  private profile: Profile | null = null;
  private error: string | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly listener: Listener = () => {},
  ) {}

  snapshot(): MachineSnapshot {
    return {
      phase: this.phase,
      busy: this.busy,
      session: this.session,
      exercise: this.exercise,
      attemptsRemaining: this.attemptsRemaining,
      lastGrade: this.lastGrade,
      profile: this.profile,
      error: this.error,
    };
  }

  private emit(): void {
    this.listener(this.snapshot());
  }

  /** True when the action was accepted; false when blocked by state/in-flight. */
  canStart(): boolean {
    return !this.busy && this.phase === "idle";
  }

  canNext(): boolean {
    return !this.busy && this.phase === "ready";
  }

  canAnswer(): boolean {
    return !this.busy && this.phase === "exercising";
  }

  canSkip(): boolean {
    return !this.busy && this.phase === "exercising";
  }

  async start(studentId: string, group?: string): Promise<boolean> {
    if (!this.canStart()) return false;
    return this.run(async () => {
      this.session = await this.client.startSession(studentId, group);
      this.phase = "ready";
      await this.refreshProfile();
    });
  }

  async next(): Promise<boolean> {
    if (!this.canNext()) return false;
    return this.run(async () => {
      const session = this.session!;
      try {
        this.exercise = await this.client.nextExercise(session.session_id);
        this.attemptsRemaining = null;
        this.lastGrade = null;
        this.phase = "exercising";
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          await this.recoverFromConflict(err, session);
          return;
        }
        throw err;
      }
    });
  }

  async answer(text: string): Promise<boolean> {
    if (!this.canAnswer()) return false;
    return this.run(async () => {
      const session = this.session!;
      try {
        const grade = await this.client.submitAttempt(session.session_id, text);
        this.lastGrade = grade;
        this.attemptsRemaining = grade.attempts_remaining;
        if (grade.exercise_closed) {
          this.exercise = null;
          this.phase = "ready";
        }
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          // the server has no open exercise for us: adopt its view
          this.exercise = null;
          this.phase = "ready";
        } else {
          throw err;
        }
      }
      await this.refreshProfile();
    });
  }

  async skip(): Promise<boolean> {
    if (!this.canSkip()) return false;
    return this.run(async () => {
      const session = this.session!;
      try {
        await this.client.skipExercise(session.session_id);
      } catch (err) {
        if (!(err instanceof ApiError && err.status === 409)) {
          throw err;
        }
      }
      this.exercise = null;
      this.phase = "ready";
      await this.refreshProfile();
    });
  }

  /** A 409 on `next` means the server still holds an open exercise this
   * client has no text for (e.g. resumed after a crash); skipping it is the
   * one legal move that returns to a servable state. Exhaustion also
   * arrives as 409 and ends the session instead. */
  private async recoverFromConflict(err: ApiError, session: SessionInfo): Promise<void> {
    if (err.detail.includes("exhausted")) {
      this.phase = "finished";
      this.error = err.detail;
      return;
    }
    await this.client.skipExercise(session.session_id);
    await this.refreshProfile();
    this.phase = "ready";
    this.error = `recovered from out-of-sync exercise: ${err.detail}`;
  }

  private async refreshProfile(): Promise<void> {
    if (this.session) {
      this.profile = await this.client.getProfile(this.session.session_id);
    }
  }

  private async run(op: () => Promise<void>): Promise<boolean> {
    this.busy = true;
    this.error = null;
    this.emit();
    try {
      await op();
      return true;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
      return false;
    } finally {
      this.busy = false;
      this.emit();
    }
  }
}
