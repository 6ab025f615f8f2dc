// Typed client for the quiz service. All calls carry the student token;
// errors become ApiError with the HTTP status and server detail.

export interface QuestionPayload {
  question: string;
  stem: string;
  format: string;
  answers: string[];
  m: number;
}

export interface OutcomePayload {
  correct: boolean;
  points: number;
  grade: number;
  bucket: number;
}

export interface GradePayload {
  grade: number;
  bucket: number;
  n_answered: number;
}

export interface AttachmentRecord {
  kind: string;
  body: string;
}

export interface TreeNode {
  id: string;
  kind: string;
  title: string;
  body: string;
  format: string;
  attachments: AttachmentRecord[];
  children: TreeNode[];
  course_links?: string[];
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiConfig {
  baseUrl: string;
  token: string;
  fetchFn?: FetchFn;
}

export class ApiClient {
  private readonly fetchFn: FetchFn;

  constructor(private readonly config: ApiConfig) {
    this.fetchFn = config.fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers: Record<string, string> = {
      "X-Student-Token": this.config.token,
      ...(init.body ? { "Content-Type": "application/json" } : {}),
    };
    let res: Response;
    try {
      res = await this.fetchFn(`${this.config.baseUrl}${path}`, {
        ...init,
        headers,
      });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!res.ok) {
      let detail = res.statusText || `HTTP ${res.status}`;
      try {
        const body = await res.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  nextQuestion(lectureId: string): Promise<QuestionPayload> {
    return this.request(`/api/lecture/${encodeURIComponent(lectureId)}/question`);
  }

  submitAnswer(
    lectureId: string,
    questionId: string,
    answerIndex: number,
  ): Promise<OutcomePayload> {
    return this.request(`/api/lecture/${encodeURIComponent(lectureId)}/answer`, {
      method: "POST",
      body: JSON.stringify({ question: questionId, answer_index: answerIndex }),
    });
  }

  grade(lectureId: string): Promise<GradePayload> {
    return this.request(`/api/lecture/${encodeURIComponent(lectureId)}/grade`);
  }

  async tree(): Promise<TreeNode[]> {
    const payload = await this.request<{ tree: TreeNode[] }>("/api/content/tree");
    return payload.tree;
  }
}
