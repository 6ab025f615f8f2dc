"""Item bank: questions attached to lectures, templates, per-question counters.

Parameterized questions are stems with named numeric placeholders.  Each
placeholder is drawn from a {min, max, step} grid by a seeded generator, and
answer expressions are evaluated over the drawn values with exact rational
arithmetic, so the same (template, seed) pair always produces byte-identical
output.
"""
from __future__ import annotations

import ast
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .content import ContentTree
from .errors import (
    AnswerWithoutAllocationError,
    ExpressionError,
    MultipleCorrectAnswersError,
    NoCorrectAnswerError,
    UnknownLectureError,
    UnknownQuestionError,
    UnknownTemplateError,
)

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")

_REDRAW_LIMIT = 100


@dataclass
class Answer:
    text: str
    correct: bool


@dataclass
class QuestionStats:
    times_allocated: int = 0
    times_answered: int = 0
    times_correct: int = 0


@dataclass
class Question:
    id: str
    lecture_id: str
    stem: str
    answers: list[Answer]
    shuffle: bool = True
    format: str = "plain"
    stats: QuestionStats = field(default_factory=QuestionStats)


@dataclass
class QuestionTemplate:
    id: str
    lecture_id: str
    stem_template: str
    parameter_specs: dict[str, dict]  # name -> {min, max, step}
    answer_expressions: list[dict]  # {expression, correct}
    format: str = "plain"


# -- exact expression evaluation ------------------------------------------

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


def _eval_node(node: ast.AST, names: dict[str, Fraction]) -> Fraction:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, names)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left = _eval_node(node.left, names)
        right = _eval_node(node.right, names)
        if isinstance(node.op, ast.Div) and right == 0:
            raise ZeroDivisionError("division by zero")
        if isinstance(node.op, ast.Pow):
            if right.denominator != 1:
                raise ExpressionError("exponents must be integers")
            if left == 0 and right < 0:
                raise ZeroDivisionError("zero to a negative power")
            return left ** int(right)
        return _BINOPS[type(node.op)](left, right)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        value = _eval_node(node.operand, names)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise ExpressionError(f"unknown placeholder {node.id!r}")
        return names[node.id]
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        if isinstance(node.value, bool):
            raise ExpressionError("booleans are not numbers")
        # Fraction(str(x)) keeps 0.1 meaning the decimal, not the float
        return Fraction(str(node.value))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)}")


def evaluate(expression: str, values: dict[str, Fraction]) -> Fraction:
    """Evaluate an arithmetic expression over placeholder values, exactly."""
    try:
        parsed = ast.parse(expression, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"bad expression {expression!r}: {exc}") from None
    return _eval_node(parsed, values)


def expression_names(expression: str) -> set[str]:
    try:
        parsed = ast.parse(expression, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"bad expression {expression!r}: {exc}") from None
    return {n.id for n in ast.walk(parsed) if isinstance(n, ast.Name)}


def _format_value(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    as_float = float(value)
    # prefer a short decimal when it is exact (e.g. 2.5), else keep the ratio
    if Fraction(str(as_float)) == value:
        return str(as_float)
    return f"{value.numerator}/{value.denominator}"


def _grid(spec: dict) -> list[Fraction]:
    lo = Fraction(str(spec["min"]))
    hi = Fraction(str(spec["max"]))
    step = Fraction(str(spec["step"]))
    out = []
    v = lo
    while v <= hi:
        out.append(v)
        v += step
    return out


class ItemBank:
    """Questions and templates grouped by lecture, with allocation counters."""

    def __init__(self, tree: ContentTree) -> None:
        self.tree = tree
        self.questions: dict[str, Question] = {}
        self.templates: dict[str, QuestionTemplate] = {}
        self._by_lecture: dict[str, list[str]] = {}
        self._counter = 0

    def _check_lecture(self, lecture_id: str) -> None:
        if not self.tree.lecture_exists(lecture_id):
            raise UnknownLectureError(f"no such lecture {lecture_id!r}")

    @staticmethod
    def _check_single_correct(flags: list[bool]) -> None:
        n = sum(flags)
        if n == 0:
            raise NoCorrectAnswerError("no answer is marked correct")
        if n > 1:
            raise MultipleCorrectAnswersError(f"{n} answers marked correct")

    def _new_id(self) -> str:
        while True:
            self._counter += 1
            candidate = f"q-{self._counter:04d}"
            if candidate not in self.questions and candidate not in self.templates:
                return candidate

    # -- authoring ---------------------------------------------------------

    def add_question(
        self,
        lecture_id: str,
        stem: str,
        answers: list[tuple[str, bool]],
        shuffle: bool = True,
        format: str = "plain",
        question_id: str | None = None,
    ) -> str:
        self._check_lecture(lecture_id)
        if len(answers) < 2:
            raise ValueError("a question needs at least two answers")
        self._check_single_correct([c for (_, c) in answers])
        question_id = question_id or self._new_id()
        if question_id in self.questions:
            raise ValueError(f"duplicate question id {question_id!r}")
        self.questions[question_id] = Question(
            id=question_id,
            lecture_id=lecture_id,
            stem=stem,
            answers=[Answer(text=t, correct=c) for (t, c) in answers],
            shuffle=shuffle,
            format=format,
        )
        self._by_lecture.setdefault(lecture_id, []).append(question_id)
        return question_id

    def add_template(
        self,
        lecture_id: str,
        stem_template: str,
        parameter_specs: dict[str, dict],
        answer_expressions: list[dict],
        format: str = "plain",
        template_id: str | None = None,
    ) -> str:
        self._check_lecture(lecture_id)
        if len(answer_expressions) < 2:
            raise ValueError("a template needs at least two answer expressions")
        self._check_single_correct([e["correct"] for e in answer_expressions])
        used = set(_PLACEHOLDER.findall(stem_template))
        for entry in answer_expressions:
            used |= expression_names(entry["expression"])
        missing = used - set(parameter_specs)
        if missing:
            raise ExpressionError(f"placeholders without specs: {sorted(missing)}")
        for name, spec in parameter_specs.items():
            lo, hi = Fraction(str(spec["min"])), Fraction(str(spec["max"]))
            if lo > hi:
                raise ValueError(f"{name}: min > max")
            if Fraction(str(spec["step"])) <= 0:
                raise ValueError(f"{name}: step must be positive")
        template_id = template_id or self._new_id()
        if template_id in self.templates:
            raise ValueError(f"duplicate template id {template_id!r}")
        self.templates[template_id] = QuestionTemplate(
            id=template_id,
            lecture_id=lecture_id,
            stem_template=stem_template,
            parameter_specs=parameter_specs,
            answer_expressions=answer_expressions,
            format=format,
        )
        return template_id

    # -- lookup ------------------------------------------------------------

    def question(self, question_id: str) -> Question:
        q = self.questions.get(question_id)
        if q is None:
            raise UnknownQuestionError(f"no such question {question_id!r}")
        return q

    def questions_for(self, lecture_id: str) -> list[str]:
        self._check_lecture(lecture_id)
        return list(self._by_lecture.get(lecture_id, []))

    # -- template instantiation -------------------------------------------

    def instantiate(self, template_id: str, seed: int) -> Question:
        template = self.templates.get(template_id)
        if template is None:
            raise UnknownTemplateError(f"no such template {template_id!r}")
        rng = random.Random(seed)
        grids = {
            name: _grid(spec)
            for name, spec in sorted(template.parameter_specs.items())
        }
        last_error: Exception | None = None
        for _ in range(_REDRAW_LIMIT):
            values = {
                name: grid[rng.randrange(len(grid))]
                for name, grid in grids.items()
            }
            try:
                answers = [
                    Answer(
                        text=_format_value(
                            evaluate(entry["expression"], values)
                        ),
                        correct=entry["correct"],
                    )
                    for entry in template.answer_expressions
                ]
            except ZeroDivisionError as exc:
                last_error = exc
                continue
            stem = _PLACEHOLDER.sub(
                lambda m: _format_value(values[m.group(1)]),
                template.stem_template,
            )
            return Question(
                id=f"{template_id}#s{seed}",
                lecture_id=template.lecture_id,
                stem=stem,
                answers=answers,
                shuffle=True,
                format=template.format,
            )
        raise ExpressionError(
            f"{template_id}: no valid draw in {_REDRAW_LIMIT} attempts "
            f"({last_error})"
        )

    # -- answer-order randomization ---------------------------------------

    @staticmethod
    def presented_order(question: Question, seed: int) -> list[int]:
        """Permutation mapping presented position -> original answer index."""
        order = list(range(len(question.answers)))
        if question.shuffle:
            random.Random(seed).shuffle(order)
        return order

    # -- counters ----------------------------------------------------------

    def bump_stats(self, question_id: str, event: str) -> QuestionStats:
        stats = self.question(question_id).stats
        if event == "allocated":
            stats.times_allocated += 1
        elif event in ("answered_correct", "answered_wrong"):
            if stats.times_answered + 1 > stats.times_allocated:
                raise AnswerWithoutAllocationError(
                    f"{question_id}: answer recorded with no open allocation"
                )
            stats.times_answered += 1
            if event == "answered_correct":
                stats.times_correct += 1
        else:
            raise ValueError(f"unknown event {event!r}")
        return stats

    # -- import/export records --------------------------------------------

    def to_records(self) -> list[dict]:
        out: list[dict] = []
        for q in self.questions.values():
            out.append(
                {
                    "id": q.id,
                    "lecture": q.lecture_id,
                    "stem": q.stem,
                    "format": q.format,
                    "shuffle": q.shuffle,
                    "answers": [
                        {"text": a.text, "correct": a.correct} for a in q.answers
                    ],
                }
            )
        for t in self.templates.values():
            out.append(
                {
                    "id": t.id,
                    "lecture": t.lecture_id,
                    "stem_template": t.stem_template,
                    "format": t.format,
                    "parameter_specs": t.parameter_specs,
                    "answer_expressions": t.answer_expressions,
                }
            )
        return out

    def load_records(self, records: list[dict]) -> None:
        for record in records:
            if "stem_template" in record:
                self.add_template(
                    record["lecture"],
                    record["stem_template"],
                    record["parameter_specs"],
                    record["answer_expressions"],
                    format=record.get("format", "plain"),
                    template_id=record.get("id"),
                )
            else:
                self.add_question(
                    record["lecture"],
                    record["stem"],
                    [(a["text"], a["correct"]) for a in record["answers"]],
                    shuffle=record.get("shuffle", True),
                    format=record.get("format", "plain"),
                    question_id=record.get("id"),
                )
        self._counter = len(self.questions) + len(self.templates)
