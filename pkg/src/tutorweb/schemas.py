"""Request and response bodies for the HTTP surface.

Everything the client may see lives here; note that no response model
carries a per-answer correctness flag outside the submission outcome.
"""
from __future__ import annotations

from pydantic import BaseModel, Field


class QuestionOut(BaseModel):
    question: str
    stem: str
    format: str = "plain"
    answers: list[str]  # presented order, text only
    m: int = Field(description="number of questions currently in the lecture")


class AnswerIn(BaseModel):
    question: str
    answer_index: int = Field(ge=0)


class AnswerOut(BaseModel):
    correct: bool
    points: float
    grade: float
    bucket: int


class GradeOut(BaseModel):
    grade: float
    bucket: int
    n_answered: int


class TreeOut(BaseModel):
    tree: list[dict]


class ImportIn(BaseModel):
    content: list[dict] = Field(default_factory=list)
    items: list[dict] = Field(default_factory=list)


class ImportOut(BaseModel):
    nodes: int
    questions: int
    templates: int


class ErrorOut(BaseModel):
    detail: str
