"""Crossover-trial harness: assignment, simulated students, exam datasets.

Students are split into two near-equal groups that alternate between the
quiz arm and the written arm over four periods, each period ending in an
exam.  Exam scores are generated additively (arm + background + period +
student offset + noise) so the model fitter can be exercised end to end,
and a 1-parameter logistic response model drives live quiz sessions for
engine-level experiments.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .allocation import QuizEngine, difficulty
from .anova import AnovaTable, ModelSpec, TrialRecord, backward_eliminate, sequential_anova
from .errors import TooFewStudentsError
from .special import logistic, logit

TUTORWEB = "tutorweb"
WRITTEN = "written"

_SEQ_A = (TUTORWEB, WRITTEN, TUTORWEB, WRITTEN)
_SEQ_B = (WRITTEN, TUTORWEB, WRITTEN, TUTORWEB)


@dataclass
class CrossoverAssignment:
    sequences: dict[str, tuple[str, ...]]

    def group(self, first_treatment: str) -> list[str]:
        return [s for s, seq in self.sequences.items()
                if seq[0] == first_treatment]


@dataclass
class SimStudent:
    id: str
    theta: float
    math_background: str = "strong"


@dataclass(frozen=True)
class SimParams:
    n_students: int = 184
    n_periods: int = 4
    baseline: float = 5.0
    treatment_effect: float = 0.0
    math_effect: float = 1.0
    exam_effects: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75)
    student_sd: float = 1.0
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.student_sd < 0 or self.noise_sd < 0:
            raise ValueError("standard deviations must be non-negative")
        if self.n_periods != len(self.exam_effects):
            raise ValueError("need one exam effect per period")


@dataclass
class TrialRun:
    records: list[TrialRecord]
    assignment: CrossoverAssignment
    table: AnovaTable
    trace: list[tuple[str, float]]
    reduced: AnovaTable


def assign_crossover(student_ids: list[str], seed: int) -> CrossoverAssignment:
    if len(student_ids) < 2:
        raise TooFewStudentsError(f"{len(student_ids)} students cannot cross over")
    shuffled = list(student_ids)
    random.Random(seed).shuffle(shuffled)
    half = len(shuffled) // 2
    sequences = {}
    for i, student in enumerate(shuffled):
        sequences[student] = _SEQ_A if i < half else _SEQ_B
    return CrossoverAssignment(sequences)


def simulate_response(theta: float, d: float, rng: random.Random) -> bool:
    d = min(max(d, 0.01), 0.99)
    return rng.random() < logistic(theta - logit(d))


@dataclass
class SessionStep:
    question_id: str
    rank: int
    correct: bool
    grade: float
    bucket: int


def simulate_quiz_session(
    sim_student: SimStudent,
    lecture_id: str,
    n_questions: int,
    engine: QuizEngine,
    seed: int,
) -> list[SessionStep]:
    rng = random.Random(seed)
    trace: list[SessionStep] = []
    for _ in range(n_questions):
        ranked = engine.rank_items(lecture_id)
        qid = engine.next_question(
            sim_student.id, lecture_id, rng.getrandbits(62)
        )
        question = engine.bank.question(qid)
        d = difficulty(question.stats, engine.policy)
        correct = simulate_response(sim_student.theta, d, rng)
        if correct:
            idx = next(
                i for i, a in enumerate(question.answers) if a.correct
            )
        else:
            wrong = [i for i, a in enumerate(question.answers) if not a.correct]
            idx = wrong[rng.randrange(len(wrong))]
        outcome = engine.record_answer(sim_student.id, lecture_id, qid, idx)
        trace.append(
            SessionStep(
                question_id=qid,
                rank=ranked.index(qid),
                correct=outcome.correct,
                grade=outcome.grade,
                bucket=outcome.bucket,
            )
        )
    return trace


def simulate_exam_scores(
    assignment: CrossoverAssignment, params: SimParams
) -> list[TrialRecord]:
    students = sorted(assignment.sequences)
    bg_rng = random.Random(f"{params.seed}:background")
    shuffled = list(students)
    bg_rng.shuffle(shuffled)
    background = {
        s: ("strong" if i < len(shuffled) // 2 else "weak")
        for i, s in enumerate(shuffled)
    }
    score_rng = random.Random(f"{params.seed}:scores")
    offsets = {
        s: score_rng.gauss(0.0, params.student_sd) for s in students
    }
    records: list[TrialRecord] = []
    for student in students:
        seq = assignment.sequences[student]
        for period in range(1, params.n_periods + 1):
            treatment = seq[period - 1]
            y = (
                params.baseline
                + (params.treatment_effect if treatment == TUTORWEB else 0.0)
                + (params.math_effect if background[student] == "strong" else 0.0)
                + params.exam_effects[period - 1]
                + offsets[student]
                + score_rng.gauss(0.0, params.noise_sd)
            )
            records.append(
                TrialRecord(
                    student=student,
                    treatment=treatment,
                    math=background[student],
                    exam=period,
                    score=min(max(y, 0.0), 10.0),
                )
            )
    return records


def run_trial(
    params: SimParams, alpha: float = 0.05, spec: ModelSpec | None = None
) -> TrialRun:
    student_ids = [f"s{i:03d}" for i in range(params.n_students)]
    assignment = assign_crossover(student_ids, params.seed)
    records = simulate_exam_scores(assignment, params)
    table = sequential_anova(records, spec)
    trace, reduced = backward_eliminate(records, spec, alpha=alpha)
    return TrialRun(records, assignment, table, trace, reduced)


# -- trial data file (one record per line) --------------------------------

def write_dataset(path: str | Path, records: list[TrialRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "student": r.student,
                "treatment": r.treatment,
                "math": r.math,
                "exam": r.exam,
                "score": r.score,
            }) + "\n")


def read_dataset(path: str | Path) -> list[TrialRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            records.append(TrialRecord(
                student=str(raw["student"]),
                treatment=str(raw["treatment"]),
                math=str(raw["math"]),
                exam=int(raw["exam"]),
                score=float(raw["score"]),
            ))
    return records
