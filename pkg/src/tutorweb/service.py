"""HTTP service: question serving, answer submission, grades, content admin.

Allocation and answer handling share one lock, and every mutation is written
to the answer log (fsynced) before the client hears back, so a crash at any
point restarts into a state consistent with everything clients were told.
The answer-order shuffle is seeded from the allocation's log seq, which makes
the permutation recoverable after a restart without storing it anywhere.
"""
from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException, Request

from .allocation import (
    WINDOW,
    AllocationPolicy,
    QuizEngine,
    grade,
    grade_bucket,
)
from .content import ContentTree
from .eventlog import EVENT_ALLOCATED, EVENT_ANSWERED, EventLog, LogEntry, read_entries
from .errors import EmptyLectureError
from .items import ItemBank, Question
from .schemas import (
    AnswerIn,
    AnswerOut,
    GradeOut,
    ImportIn,
    ImportOut,
    QuestionOut,
    TreeOut,
)
from .store import Roster, Store

STUDENT_TOKEN_HEADER = "X-Student-Token"
ADMIN_KEY_HEADER = "X-Admin-Key"


def _derived_seed(*parts: object) -> int:
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class ServiceState:
    store: Store
    roster: Roster
    tree: ContentTree
    bank: ItemBank
    engine: QuizEngine
    log: EventLog
    seed: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)
    # (student, lecture) -> question -> seq of its latest open allocation
    pending: dict[tuple[str, str], dict[str, int]] = field(default_factory=dict)

    def rebuild_pending(self) -> None:
        self.pending = {}
        for entry in read_entries(self.log.path):
            if entry.question not in self.bank.questions:
                continue
            key = (entry.student, entry.lecture)
            if entry.event == EVENT_ALLOCATED:
                self.pending.setdefault(key, {})[entry.question] = entry.seq
            else:
                self.pending.get(key, {}).pop(entry.question, None)

    def presented(self, question: Question, alloc_seq: int) -> list[int]:
        perm_seed = _derived_seed(
            "perm", alloc_seq, question.lecture_id, question.id
        )
        return ItemBank.presented_order(question, perm_seed)


def _load_state(data_dir: str | Path, seed: int,
                policy: AllocationPolicy | None) -> ServiceState:
    store = Store(data_dir)
    tree, bank = store.load_content()
    engine = QuizEngine(bank, policy)
    log = store.open_log()
    from .eventlog import replay

    # tolerant: imports may have removed questions older entries refer to
    replay(read_entries(store.log_path), engine, skip_unknown=True)
    state = ServiceState(
        store=store, roster=store.load_roster(), tree=tree, bank=bank,
        engine=engine, log=log, seed=seed,
    )
    state.rebuild_pending()
    return state


def create_app(
    data_dir: str | Path,
    seed: int = 0,
    policy: AllocationPolicy | None = None,
) -> FastAPI:
    app = FastAPI(title="tutorweb", version="0.1.0")
    app.state.service = _load_state(data_dir, seed, policy)

    def svc(request: Request) -> ServiceState:
        return request.app.state.service

    def current_student(
        request: Request,
        x_student_token: str | None = Header(default=None),
    ) -> str:
        student = None
        if x_student_token:
            student = svc(request).roster.student_for_token(x_student_token)
        if student is None:
            raise HTTPException(401, "missing or unknown student token")
        return student

    def known_lecture(request: Request, lecture_id: str) -> str:
        if not svc(request).tree.lecture_exists(lecture_id):
            raise HTTPException(404, f"no such lecture {lecture_id!r}")
        return lecture_id

    @app.get("/api/lecture/{lecture_id}/question", response_model=QuestionOut)
    def next_question(
        request: Request,
        lecture_id: str,
        student: str = Depends(current_student),
    ) -> QuestionOut:
        state = svc(request)
        known_lecture(request, lecture_id)
        with state.lock:
            seq = state.log.next_seq()
            alloc_seed = _derived_seed(
                "alloc", state.seed, seq, student, lecture_id
            )
            try:
                question_id = state.engine.choose_question(
                    student, lecture_id, alloc_seed
                )
            except EmptyLectureError:
                raise HTTPException(409, "lecture has no questions")
            state.log.append(LogEntry(
                seq=seq, time=time.time(), student=student,
                lecture=lecture_id, question=question_id,
                event=EVENT_ALLOCATED,
            ))
            state.engine.apply_allocated(student, lecture_id, question_id)
            state.pending.setdefault((student, lecture_id), {})[question_id] = seq
            question = state.bank.question(question_id)
            order = state.presented(question, seq)
            m = len(state.bank.questions_for(lecture_id))
        return QuestionOut(
            question=question_id,
            stem=question.stem,
            format=question.format,
            answers=[question.answers[i].text for i in order],
            m=m,
        )

    @app.post("/api/lecture/{lecture_id}/answer", response_model=AnswerOut)
    def submit_answer(
        request: Request,
        lecture_id: str,
        body: AnswerIn,
        student: str = Depends(current_student),
    ) -> AnswerOut:
        state = svc(request)
        known_lecture(request, lecture_id)
        with state.lock:
            if body.question not in state.bank.questions:
                raise HTTPException(404, f"no such question {body.question!r}")
            question = state.bank.question(body.question)
            open_here = state.pending.get((student, lecture_id), {})
            if body.question not in open_here:
                raise HTTPException(
                    409, "question is not awaiting an answer; request a new one"
                )
            if body.answer_index >= len(question.answers):
                raise HTTPException(422, "answer index out of presented range")
            alloc_seq = open_here[body.question]
            order = state.presented(question, alloc_seq)
            original = order[body.answer_index]
            correct = question.answers[original].correct
            points = 1.0 if correct else -0.5
            history = state.engine.state(student, lecture_id).history
            grade_after = (
                sum(r.points for r in history[-(WINDOW - 1):]) + points
            )
            state.log.append(LogEntry(
                seq=state.log.next_seq(), time=time.time(), student=student,
                lecture=lecture_id, question=body.question,
                event=EVENT_ANSWERED, correct=correct, points=points,
                grade_after=grade_after,
            ))
            del open_here[body.question]
            outcome = state.engine.apply_answered(
                student, lecture_id, body.question, correct
            )
        return AnswerOut(
            correct=outcome.correct,
            points=outcome.points,
            grade=outcome.grade,
            bucket=outcome.bucket,
        )

    @app.get("/api/lecture/{lecture_id}/grade", response_model=GradeOut)
    def get_grade(
        request: Request,
        lecture_id: str,
        student: str = Depends(current_student),
    ) -> GradeOut:
        state = svc(request)
        known_lecture(request, lecture_id)
        with state.lock:
            sl = state.engine.states.get((student, lecture_id))
            if sl is None:
                return GradeOut(grade=0.0, bucket=0, n_answered=0)
            return GradeOut(
                grade=grade(sl), bucket=grade_bucket(sl),
                n_answered=len(sl.history),
            )

    @app.get("/api/content/tree", response_model=TreeOut)
    def content_tree(
        request: Request, student: str = Depends(current_student)
    ) -> TreeOut:
        state = svc(request)
        with state.lock:
            return TreeOut(tree=state.tree.to_document())

    @app.post("/api/content/import", response_model=ImportOut)
    def import_content(
        request: Request,
        body: ImportIn,
        x_admin_key: str | None = Header(default=None),
    ) -> ImportOut:
        state = svc(request)
        if state.roster.admin_key is None or x_admin_key != state.roster.admin_key:
            raise HTTPException(401, "missing or bad admin key")
        document = {"content": body.content, "items": body.items}
        with state.lock:
            try:
                tree, bank = Store.build_content(document)
            except Exception as exc:
                raise HTTPException(422, f"bad content document: {exc}")
            engine = QuizEngine(bank, state.engine.policy)
            from .eventlog import replay

            replay(read_entries(state.log.path), engine, skip_unknown=True)
            state.tree, state.bank, state.engine = tree, bank, engine
            state.store.save_content(tree, bank)
            state.rebuild_pending()
            return ImportOut(
                nodes=len(tree.nodes),
                questions=len(bank.questions),
                templates=len(bank.templates),
            )

    return app
