"""Adaptive allocation: difficulty ranking, grade window, and the serving PMF.

Questions are ranked easiest to hardest by their observed failure rate.  A
student's recent performance (how many of the last eight answers were correct)
picks one of nine probability curves over the ranked list; better students get
mass shifted towards the hard end.  The curve family is a Beta kernel sampled
at rank midpoints: for rank r of m let x = (r - 0.5)/m, and weight
x^(k*g/8) * (1-x)^(k*(1-g/8)) with concentration k.  At g = 4 the curve is
symmetric; raising g moves mass right (first-order stochastic dominance).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import (
    EmptyLectureError,
    InvalidBucketError,
    NoPriorAllocationError,
    QuestionNotInLectureError,
)
from .items import ItemBank, QuestionStats

WINDOW = 8
POINTS_CORRECT = 1.0
POINTS_WRONG = -0.5


@dataclass(frozen=True)
class AllocationPolicy:
    k: float = 8.0
    exclude_last_served: bool = True
    cold_start_difficulty: float = 0.5

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise ValueError("concentration k must be positive")


@dataclass
class AnswerRecord:
    question_id: str
    correct: bool
    points: float
    timestamp: int


@dataclass
class StudentLectureState:
    student_id: str
    lecture_id: str
    history: list[AnswerRecord] = field(default_factory=list)
    last_served: str | None = None
    # open allocations: question id -> count served but not yet answered
    open: dict[str, int] = field(default_factory=dict)


@dataclass
class AnswerOutcome:
    correct: bool
    points: float
    grade: float
    bucket: int


def difficulty(stats: QuestionStats, policy: AllocationPolicy) -> float:
    """Observed failure rate, or the cold-start default before any answer."""
    if stats.times_answered == 0:
        return policy.cold_start_difficulty
    return 1.0 - stats.times_correct / stats.times_answered


def _window(state: StudentLectureState) -> list[AnswerRecord]:
    return state.history[-WINDOW:]


def grade(state: StudentLectureState) -> float:
    return sum(r.points for r in _window(state))


def grade_bucket(state: StudentLectureState) -> int:
    return sum(1 for r in _window(state) if r.correct)


def allocation_pmf(
    m: int, bucket: int, policy: AllocationPolicy | None = None
) -> list[float]:
    """Probability of serving each rank 1..m (index 0 = easiest)."""
    if m < 1:
        raise ValueError(f"need at least one item, got {m}")
    if not 0 <= bucket <= WINDOW:
        raise InvalidBucketError(f"bucket {bucket} outside 0..{WINDOW}")
    policy = policy or AllocationPolicy()
    g_hat = bucket / WINDOW
    a = policy.k * g_hat          # alpha - 1
    b = policy.k * (1.0 - g_hat)  # beta - 1
    log_w = []
    for r in range(1, m + 1):
        x = (r - 0.5) / m
        log_w.append(a * math.log(x) + b * math.log(1.0 - x))
    peak = max(log_w)
    w = [math.exp(lw - peak) for lw in log_w]
    total = sum(w)
    return [wi / total for wi in w]


class QuizEngine:
    """Serves questions and keeps the per-(student, lecture) answer window.

    All mutations funnel through apply_allocated/apply_answered so that
    replaying a logged event stream reproduces live state exactly.
    """

    def __init__(
        self, bank: ItemBank, policy: AllocationPolicy | None = None
    ) -> None:
        self.bank = bank
        self.policy = policy or AllocationPolicy()
        self.states: dict[tuple[str, str], StudentLectureState] = {}
        self._clock = 0

    def state(self, student_id: str, lecture_id: str) -> StudentLectureState:
        key = (student_id, lecture_id)
        if key not in self.states:
            self.states[key] = StudentLectureState(student_id, lecture_id)
        return self.states[key]

    def rank_items(self, lecture_id: str) -> list[str]:
        ids = self.bank.questions_for(lecture_id)
        if not ids:
            raise EmptyLectureError(f"lecture {lecture_id!r} has no questions")
        return sorted(
            ids,
            key=lambda q: (
                difficulty(self.bank.question(q).stats, self.policy),
                q,
            ),
        )

    # -- serving -----------------------------------------------------------

    def choose_question(
        self, student_id: str, lecture_id: str, seed: int
    ) -> str:
        """Pick the next question without recording the allocation."""
        ranked = self.rank_items(lecture_id)
        m = len(ranked)
        state = self.state(student_id, lecture_id)
        pmf = allocation_pmf(m, grade_bucket(state), self.policy)
        if (
            self.policy.exclude_last_served
            and m >= 2
            and state.last_served in ranked
        ):
            skip = ranked.index(state.last_served)
            pmf[skip] = 0.0
            total = sum(pmf)
            pmf = [p / total for p in pmf]
        u = random.Random(seed).random()
        acc = 0.0
        for i, p in enumerate(pmf):
            acc += p
            if u < acc:
                return ranked[i]
        return ranked[-1]  # guard against accumulated rounding

    def next_question(
        self, student_id: str, lecture_id: str, seed: int
    ) -> str:
        question_id = self.choose_question(student_id, lecture_id, seed)
        self.apply_allocated(student_id, lecture_id, question_id)
        return question_id

    def record_answer(
        self,
        student_id: str,
        lecture_id: str,
        question_id: str,
        answer_index: int,
    ) -> AnswerOutcome:
        question = self.bank.question(question_id)
        if question.lecture_id != lecture_id:
            raise QuestionNotInLectureError(
                f"{question_id} is not part of lecture {lecture_id!r}"
            )
        if not 0 <= answer_index < len(question.answers):
            raise ValueError(f"answer index {answer_index} out of range")
        state = self.state(student_id, lecture_id)
        if state.open.get(question_id, 0) < 1:
            raise NoPriorAllocationError(
                f"{question_id} was not allocated to {student_id!r}"
            )
        correct = question.answers[answer_index].correct
        return self.apply_answered(student_id, lecture_id, question_id, correct)

    # -- raw mutations (shared by live path and log replay) ----------------

    def apply_allocated(
        self, student_id: str, lecture_id: str, question_id: str
    ) -> None:
        self.bank.bump_stats(question_id, "allocated")
        state = self.state(student_id, lecture_id)
        state.last_served = question_id
        state.open[question_id] = state.open.get(question_id, 0) + 1

    def apply_answered(
        self, student_id: str, lecture_id: str, question_id: str, correct: bool
    ) -> AnswerOutcome:
        self.bank.bump_stats(
            question_id, "answered_correct" if correct else "answered_wrong"
        )
        state = self.state(student_id, lecture_id)
        held = state.open.get(question_id, 0)
        if held > 1:
            state.open[question_id] = held - 1
        else:
            state.open.pop(question_id, None)
        self._clock += 1
        points = POINTS_CORRECT if correct else POINTS_WRONG
        state.history.append(
            AnswerRecord(question_id, correct, points, self._clock)
        )
        return AnswerOutcome(
            correct=correct,
            points=points,
            grade=grade(state),
            bucket=grade_bucket(state),
        )
