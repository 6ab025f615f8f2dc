"""Data-directory layout and engine bootstrap.

A data dir holds three files:
  content.json - {"content": [node tree records], "items": [question records]}
  roster.json  - {"students": {id: token}, "admin_key": "..."}
  answers.log  - append-only event log (see eventlog)

Starting a service is: load content, build a fresh engine, replay the log.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .allocation import AllocationPolicy, QuizEngine
from .content import ContentTree
from .eventlog import EventLog, read_entries, replay
from .items import ItemBank

CONTENT_FILE = "content.json"
ROSTER_FILE = "roster.json"
LOG_FILE = "answers.log"


@dataclass
class Roster:
    students: dict[str, str] = field(default_factory=dict)  # id -> token
    admin_key: str | None = None

    def student_for_token(self, token: str) -> str | None:
        for student, secret in self.students.items():
            if secret == token:
                return student
        return None


class Store:
    def __init__(self, data_dir: str | Path) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    @property
    def content_path(self) -> Path:
        return self.data_dir / CONTENT_FILE

    @property
    def roster_path(self) -> Path:
        return self.data_dir / ROSTER_FILE

    @property
    def log_path(self) -> Path:
        return self.data_dir / LOG_FILE

    # -- content -----------------------------------------------------------

    def load_content(self) -> tuple[ContentTree, ItemBank]:
        if not self.content_path.exists():
            tree = ContentTree()
            return tree, ItemBank(tree)
        document = json.loads(self.content_path.read_text("utf-8"))
        return self.build_content(document)

    @staticmethod
    def build_content(document: dict) -> tuple[ContentTree, ItemBank]:
        tree = ContentTree.from_document(document.get("content", []))
        bank = ItemBank(tree)
        bank.load_records(document.get("items", []))
        return tree, bank

    def save_content(self, tree: ContentTree, bank: ItemBank) -> None:
        document = {"content": tree.to_document(), "items": bank.to_records()}
        self.content_path.write_text(
            json.dumps(document, indent=2) + "\n", "utf-8"
        )

    # -- roster ------------------------------------------------------------

    def load_roster(self) -> Roster:
        if not self.roster_path.exists():
            return Roster()
        raw = json.loads(self.roster_path.read_text("utf-8"))
        return Roster(
            students=dict(raw.get("students", {})),
            admin_key=raw.get("admin_key"),
        )

    def save_roster(self, roster: Roster) -> None:
        self.roster_path.write_text(
            json.dumps(
                {"students": roster.students, "admin_key": roster.admin_key},
                indent=2,
            ) + "\n",
            "utf-8",
        )

    # -- engine bootstrap --------------------------------------------------

    def open_log(self) -> EventLog:
        return EventLog(self.log_path)

    def build_engine(
        self,
        policy: AllocationPolicy | None = None,
        skip_unknown: bool = False,
    ) -> QuizEngine:
        _, bank = self.load_content()
        engine = QuizEngine(bank, policy)
        replay(read_entries(self.log_path), engine, skip_unknown=skip_unknown)
        return engine
