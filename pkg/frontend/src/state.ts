// Quiz session state machine. The displayed grade is always the value
// most recently returned by the server (submit or grade fetch); the
// client never learns which answers are correct before submitting.
import { ApiClient, ApiError } from "./api.js";
import type { GradePayload, OutcomePayload, QuestionPayload } from "./api.js";

export type Phase =
  | "idle"
  | "loading"
  | "question"
  | "submitting"
  | "outcome";

export interface QuizViewState {
  lectureId: string | null;
  phase: Phase;
  question: QuestionPayload | null;
  selected: number | null;
  outcome: OutcomePayload | null;
  grade: number | null;
  bucket: number | null;
  nAnswered: number | null;
  banner: string | null;
}

type Listener = (state: QuizViewState) => void;

function initialState(): QuizViewState {
  return {
    lectureId: null,
    phase: "idle",
    question: null,
    selected: null,
    outcome: null,
    grade: null,
    bucket: null,
    nAnswered: null,
    banner: null,
  };
}

export class QuizSession {
  private current = initialState();
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  get state(): QuizViewState {
    return this.current;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private patch(changes: Partial<QuizViewState>): void {
    this.current = { ...this.current, ...changes };
    for (const fn of this.listeners) fn(this.current);
  }

  private fail(err: unknown, revert: Phase): void {
    const message =
      err instanceof ApiError ? err.message : `unexpected error: ${String(err)}`;
    this.patch({ phase: revert, banner: message });
  }

  private applyGrade(payload: GradePayload): void {
    this.patch({
      grade: payload.grade,
      bucket: payload.bucket,
      nAnswered: payload.n_answered,
    });
  }

  async enterLecture(lectureId: string): Promise<void> {
    this.current = initialState();
    this.patch({ lectureId, phase: "loading" });
    try {
      this.applyGrade(await this.api.grade(lectureId));
      const question = await this.api.nextQuestion(lectureId);
      this.patch({ phase: "question", question, selected: null, outcome: null });
    } catch (err) {
      this.fail(err, "idle");
    }
  }

  select(index: number): void {
    if (this.current.phase !== "question") return;
    const m = this.current.question?.answers.length ?? 0;
    if (index < 0 || index >= m) return;
    this.patch({ selected: index });
  }

  async submit(): Promise<void> {
    const { phase, lectureId, question, selected } = this.current;
    if (phase !== "question" || lectureId === null) return;
    if (question === null || selected === null) return;
    this.patch({ phase: "submitting", banner: null });
    try {
      const outcome: OutcomePayload = await this.api.submitAnswer(
        lectureId,
        question.question,
        selected,
      );
      const answered = (this.current.nAnswered ?? 0) + 1;
      this.patch({
        phase: "outcome",
        outcome,
        grade: outcome.grade,
        bucket: outcome.bucket,
        nAnswered: answered,
      });
    } catch (err) {
      this.fail(err, "question");
    }
  }

  async nextQuestion(): Promise<void> {
    const { phase, lectureId } = this.current;
    if (phase !== "outcome" || lectureId === null) return;
    this.patch({ phase: "loading" });
    try {
      const question = await this.api.nextQuestion(lectureId);
      this.patch({ phase: "question", question, selected: null, outcome: null });
    } catch (err) {
      this.fail(err, "outcome");
    }
  }

  // The on-demand grade check; also how a reloaded session restores its
  // display, since the server is the source of truth.
  async refreshGrade(): Promise<void> {
    const { lectureId } = this.current;
    if (lectureId === null) return;
    try {
      this.applyGrade(await this.api.grade(lectureId));
    } catch (err) {
      this.patch({ banner: err instanceof ApiError ? err.message : String(err) });
    }
  }

  dismissBanner(): void {
    if (this.current.banner !== null) this.patch({ banner: null });
  }
}
