// Single-page UI: lecture picker from the content tree, slide viewer,
// and the quiz loop (question, submit, outcome, grade on demand).
import { ApiClient, ApiError } from "./api.js";
import type { TreeNode } from "./api.js";
import { lectureCatalog, slidesOf } from "./tree.js";
import type { LectureRef } from "./tree.js";
import { QuizSession } from "./state.js";
import type { QuizViewState } from "./state.js";

type View = "picker" | "quiz" | "slides";

export interface App {
  session: QuizSession;
  root: HTMLElement;
}

export function formatPoints(points: number): string {
  const sign = points >= 0 ? "+" : "";
  return `${sign}${points.toFixed(1)}`;
}

export function mountApp(root: HTMLElement, api: ApiClient): App {
  const session = new QuizSession(api);
  let view: View = "picker";
  let tree: TreeNode[] = [];
  let catalog: LectureRef[] = [];
  let pickerError: string | null = null;
  let slideIndex = 0;
  let slideLecture: LectureRef | null = null;

  const el = (
    tag: string,
    attrs: Record<string, string> = {},
    text?: string,
  ): HTMLElement => {
    const node = root.ownerDocument.createElement(tag);
    for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
    if (text !== undefined) node.textContent = text;
    return node;
  };

  const banner = (message: string | null, dismiss: () => void): HTMLElement => {
    const box = el("div", { "data-testid": "banner" });
    if (message !== null) {
      box.appendChild(el("span", {}, message));
      const close = el("button", { "data-testid": "banner-dismiss" }, "dismiss");
      close.addEventListener("click", dismiss);
      box.appendChild(close);
    }
    return box;
  };

  const renderPicker = (): HTMLElement => {
    const panel = el("section", { "data-testid": "picker" });
    panel.appendChild(el("h1", {}, "Lectures"));
    if (pickerError !== null) {
      panel.appendChild(el("p", { "data-testid": "picker-error" }, pickerError));
    }
    if (catalog.length === 0 && pickerError === null) {
      panel.appendChild(el("p", { "data-testid": "empty" }, "No content yet."));
    }
    for (const ref of catalog) {
      const row = el("div", { "data-testid": "lecture-row" });
      row.appendChild(
        el(
          "span",
          {},
          `${ref.departmentTitle} / ${ref.courseTitle} / ${ref.tutorialTitle}`,
        ),
      );
      const start = el(
        "button",
        { "data-testid": `start-${ref.courseId}-${ref.id}` },
        ref.title,
      );
      start.addEventListener("click", () => {
        view = "quiz";
        void session.enterLecture(ref.id);
      });
      row.appendChild(start);
      const browse = el(
        "button",
        { "data-testid": `slides-${ref.courseId}-${ref.id}` },
        "slides",
      );
      browse.addEventListener("click", () => {
        view = "slides";
        slideLecture = ref;
        slideIndex = 0;
        render();
      });
      row.appendChild(browse);
      panel.appendChild(row);
    }
    return panel;
  };

  const renderSlides = (): HTMLElement => {
    const panel = el("section", { "data-testid": "slides" });
    const slides = slideLecture ? slidesOf(tree, slideLecture.id) : [];
    const back = el("button", { "data-testid": "back" }, "back");
    back.addEventListener("click", () => {
      view = "picker";
      render();
    });
    panel.appendChild(back);
    if (slides.length === 0) {
      panel.appendChild(el("p", { "data-testid": "empty" }, "No slides."));
      return panel;
    }
    const slide = slides[Math.min(slideIndex, slides.length - 1)]!;
    panel.appendChild(el("h2", { "data-testid": "slide-title" }, slide.title));
    panel.appendChild(el("div", { "data-testid": "slide-body" }, slide.body));
    const prev = el("button", { "data-testid": "slide-prev" }, "previous");
    prev.addEventListener("click", () => {
      if (slideIndex > 0) slideIndex -= 1;
      render();
    });
    const next = el("button", { "data-testid": "slide-next" }, "next");
    next.addEventListener("click", () => {
      if (slideIndex < slides.length - 1) slideIndex += 1;
      render();
    });
    panel.appendChild(prev);
    panel.appendChild(next);
    return panel;
  };

  const renderQuiz = (state: QuizViewState): HTMLElement => {
    const panel = el("section", { "data-testid": "quiz" });
    const back = el("button", { "data-testid": "back" }, "back");
    back.addEventListener("click", () => {
      view = "picker";
      render();
    });
    panel.appendChild(back);
    panel.appendChild(banner(state.banner, () => session.dismissBanner()));

    const gradeRow = el("div", {});
    gradeRow.appendChild(el("span", {}, "Grade: "));
    gradeRow.appendChild(
      el(
        "span",
        { "data-testid": "grade" },
        state.grade === null ? "-" : state.grade.toFixed(1),
      ),
    );
    const refresh = el("button", { "data-testid": "grade-refresh" }, "check grade");
    refresh.addEventListener("click", () => void session.refreshGrade());
    gradeRow.appendChild(refresh);
    panel.appendChild(gradeRow);

    if (state.phase === "loading" || state.phase === "idle") {
      panel.appendChild(el("p", {}, "loading..."));
      return panel;
    }

    const question = state.question;
    if (question !== null && state.phase !== "outcome") {
      panel.appendChild(el("h2", { "data-testid": "stem" }, question.stem));
      question.answers.forEach((text, i) => {
        const pick = el(
          "button",
          {
            "data-testid": `answer-${i}`,
            "aria-pressed": state.selected === i ? "true" : "false",
          },
          text,
        );
        pick.addEventListener("click", () => session.select(i));
        panel.appendChild(pick);
      });
      const submit = el(
        "button",
        { "data-testid": "submit" },
        state.phase === "submitting" ? "submitting..." : "submit",
      );
      if (state.phase !== "question" || state.selected === null) {
        submit.setAttribute("disabled", "");
      }
      submit.addEventListener("click", () => void session.submit());
      panel.appendChild(submit);
    }

    if (state.phase === "outcome" && state.outcome !== null) {
      const out = el("div", { "data-testid": "outcome" });
      out.appendChild(
        el(
          "span",
          { "data-testid": "verdict" },
          state.outcome.correct ? "correct" : "wrong",
        ),
      );
      out.appendChild(
        el("span", { "data-testid": "points" }, formatPoints(state.outcome.points)),
      );
      panel.appendChild(out);
      const next = el("button", { "data-testid": "next" }, "next question");
      next.addEventListener("click", () => void session.nextQuestion());
      panel.appendChild(next);
    }
    return panel;
  };

  const render = (): void => {
    root.textContent = "";
    if (view === "picker") root.appendChild(renderPicker());
    else if (view === "slides") root.appendChild(renderSlides());
    else root.appendChild(renderQuiz(session.state));
  };

  session.subscribe(() => {
    if (view === "quiz") render();
  });

  void api
    .tree()
    .then((payload) => {
      tree = payload;
      catalog = lectureCatalog(tree);
      pickerError = null;
    })
    .catch((err) => {
      pickerError =
        err instanceof ApiError ? err.message : `failed to load: ${String(err)}`;
    })
    .then(() => {
      if (view === "picker") render();
    });

  render();
  return { session, root };
}
