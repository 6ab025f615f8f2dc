// In-memory stand-in for the quiz service. It keeps answer correctness
// server-side, applies the same windowed grading rules, and records every
// exchange so tests can inspect the traffic like a network capture.

export interface FakeAnswer {
  text: string;
  correct: boolean;
}

export interface FakeQuestion {
  id: string;
  stem: string;
  answers: FakeAnswer[];
}

export interface Captured {
  method: string;
  url: string;
  status: number;
  requestBody: unknown;
  responseBody: unknown;
}

interface HistoryRecord {
  correct: boolean;
  points: number;
}

interface PendingAllocation {
  questionId: string;
  perm: number[];
}

const WINDOW = 8;

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class FakeService {
  captured: Captured[] = [];
  failNextWith: number | null = null;
  private history = new Map<string, HistoryRecord[]>();
  private pending = new Map<string, PendingAllocation>();
  private lastServed = new Map<string, string>();
  private rng: () => number;

  constructor(
    private readonly lectures: Record<string, FakeQuestion[]>,
    private readonly opts: { token: string; seed: number; tree?: unknown[] },
  ) {
    this.rng = mulberry32(opts.seed);
  }

  gradeOf(lectureId: string): number {
    const window = (this.history.get(lectureId) ?? []).slice(-WINDOW);
    return window.reduce((acc, r) => acc + r.points, 0);
  }

  correctTextOf(lectureId: string, questionId: string): string {
    const q = (this.lectures[lectureId] ?? []).find((x) => x.id === questionId);
    if (!q) throw new Error(`no such question ${questionId}`);
    return q.answers.find((a) => a.correct)!.text;
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = (init?.method ?? "GET").toUpperCase();
    const requestBody =
      typeof init?.body === "string" ? JSON.parse(init.body) : null;
    const respond = (status: number, body: unknown): Response => {
      this.captured.push({ method, url, status, requestBody, responseBody: body });
      return new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
      });
    };

    if (this.failNextWith !== null) {
      const status = this.failNextWith;
      this.failNextWith = null;
      return respond(status, { detail: "injected failure" });
    }
    const headers = new Headers(init?.headers);
    if (headers.get("X-Student-Token") !== this.opts.token) {
      return respond(401, { detail: "unknown token" });
    }

    const path = new URL(url, "http://fake").pathname;
    if (path === "/api/content/tree") {
      return respond(200, { tree: this.opts.tree ?? [] });
    }
    const match = path.match(/^\/api\/lecture\/([^/]+)\/(question|answer|grade)$/);
    if (!match) return respond(404, { detail: "no such route" });
    const lectureId = decodeURIComponent(match[1]!);
    const verb = match[2]!;
    const pool = this.lectures[lectureId];
    if (!pool) return respond(404, { detail: "no such lecture" });

    if (verb === "grade") {
      const records = this.history.get(lectureId) ?? [];
      const window = records.slice(-WINDOW);
      return respond(200, {
        grade: this.gradeOf(lectureId),
        bucket: window.filter((r) => r.correct).length,
        n_answered: records.length,
      });
    }

    if (verb === "question" && method === "GET") {
      let allocation = this.pending.get(lectureId);
      if (!allocation) {
        let candidates = pool;
        const last = this.lastServed.get(lectureId);
        if (pool.length >= 2 && last !== undefined) {
          candidates = pool.filter((q) => q.id !== last);
        }
        const target = candidates[Math.floor(this.rng() * candidates.length)]!;
        const perm = target.answers.map((_, i) => i);
        for (let i = perm.length - 1; i > 0; i--) {
          const j = Math.floor(this.rng() * (i + 1));
          [perm[i], perm[j]] = [perm[j]!, perm[i]!];
        }
        allocation = { questionId: target.id, perm };
        this.pending.set(lectureId, allocation);
        this.lastServed.set(lectureId, target.id);
      }
      const q = pool.find((x) => x.id === allocation!.questionId)!;
      return respond(200, {
        question: q.id,
        stem: q.stem,
        format: "plain",
        answers: allocation.perm.map((i) => q.answers[i]!.text),
        m: pool.length,
      });
    }

    if (verb === "answer" && method === "POST") {
      const allocation = this.pending.get(lectureId);
      if (!allocation || allocation.questionId !== requestBody.question) {
        return respond(409, { detail: "question is not pending" });
      }
      const q = pool.find((x) => x.id === allocation.questionId)!;
      const index: number = requestBody.answer_index;
      if (index < 0 || index >= allocation.perm.length) {
        return respond(422, { detail: "answer index out of range" });
      }
      const correct = q.answers[allocation.perm[index]!]!.correct;
      const points = correct ? 1.0 : -0.5;
      this.pending.delete(lectureId);
      const records = this.history.get(lectureId) ?? [];
      records.push({ correct, points });
      this.history.set(lectureId, records);
      const window = records.slice(-WINDOW);
      return respond(200, {
        correct,
        points,
        grade: this.gradeOf(lectureId),
        bucket: window.filter((r) => r.correct).length,
      });
    }
    return respond(404, { detail: "no such route" });
  };
}

export function scanForKeys(value: unknown, banned: Set<string>): string[] {
  const found: string[] = [];
  if (Array.isArray(value)) {
    for (const item of value) found.push(...scanForKeys(item, banned));
  } else if (value !== null && typeof value === "object") {
    for (const [k, v] of Object.entries(value as Record<string, unknown>)) {
      if (banned.has(k)) found.push(k);
      found.push(...scanForKeys(v, banned));
    }
  }
  return found;
}
