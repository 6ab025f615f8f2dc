"""Teaching-material tree: departments, courses, tutorials, lectures, slides.

Containment is strict (every node except a department has exactly one parent
of the preceding kind), with one exception to pure tree shape: a tutorial can
additionally be *linked* to further courses, so it shows up under each of them
when traversing.  Slides can carry attachments (examples, details, references,
figures); lecture exports deliberately leave those out while tutorial exports
include everything.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    InvalidKindPairingError,
    KindMismatchError,
    UnknownNodeError,
    UnknownParentError,
)

KIND_CHAIN = ("department", "course", "tutorial", "lecture", "slide")

ATTACHMENT_KINDS = ("example", "detail", "reference", "figure")


@dataclass
class Attachment:
    kind: str  # one of ATTACHMENT_KINDS
    body: str


@dataclass
class ContentNode:
    id: str
    kind: str
    title: str
    body: str
    format: str = "plain"  # body markup is stored verbatim, never interpreted
    parent_id: str | None = None
    order_index: int = 0
    attachments: list[Attachment] = field(default_factory=list)
    children: list[str] = field(default_factory=list)


def _child_kind(parent_kind: str | None) -> str | None:
    """The only kind allowed directly under ``parent_kind``."""
    if parent_kind is None:
        return KIND_CHAIN[0]
    i = KIND_CHAIN.index(parent_kind)
    return KIND_CHAIN[i + 1] if i + 1 < len(KIND_CHAIN) else None


class ContentTree:
    """Mutable store for the content tree plus the course<->tutorial link set."""

    def __init__(self) -> None:
        self.nodes: dict[str, ContentNode] = {}
        self.roots: list[str] = []
        # extra course -> tutorial edges on top of containment
        self.links: set[tuple[str, str]] = set()
        self._counter = 0

    # -- construction ------------------------------------------------------

    def _new_id(self) -> str:
        while True:
            self._counter += 1
            candidate = f"node-{self._counter:04d}"
            if candidate not in self.nodes:
                return candidate

    def add_node(
        self,
        parent_id: str | None,
        kind: str,
        title: str,
        body: str = "",
        format: str = "plain",
        node_id: str | None = None,
    ) -> str:
        if kind not in KIND_CHAIN:
            raise InvalidKindPairingError(f"unknown node kind {kind!r}")
        if parent_id is None:
            if kind != "department":
                raise InvalidKindPairingError(
                    f"{kind} needs a parent; only departments sit at the root"
                )
            siblings = self.roots
        else:
            parent = self.nodes.get(parent_id)
            if parent is None:
                raise UnknownParentError(f"no such node {parent_id!r}")
            if _child_kind(parent.kind) != kind:
                raise InvalidKindPairingError(
                    f"a {kind} cannot sit under a {parent.kind}"
                )
            siblings = parent.children

        node_id = node_id or self._new_id()
        if node_id in self.nodes:
            raise ValueError(f"duplicate node id {node_id!r}")
        order = 1 + max(
            (self.nodes[s].order_index for s in siblings), default=-1
        )
        node = ContentNode(
            id=node_id,
            kind=kind,
            title=title,
            body=body,
            format=format,
            parent_id=parent_id,
            order_index=order,
        )
        self.nodes[node_id] = node
        siblings.append(node_id)
        return node_id

    def attach(self, slide_id: str, kind: str, body: str) -> None:
        slide = self._get(slide_id, "slide")
        if kind not in ATTACHMENT_KINDS:
            raise ValueError(f"unknown attachment kind {kind!r}")
        slide.attachments.append(Attachment(kind=kind, body=body))

    def link_tutorial(self, tutorial_id: str, course_id: str) -> set[str]:
        """Link a tutorial to an additional course; idempotent.

        Returns the full set of course ids the tutorial now appears under.
        """
        tutorial = self._get(tutorial_id, "tutorial")
        self._get(course_id, "course")
        if course_id != tutorial.parent_id:
            self.links.add((course_id, tutorial_id))
        return self.courses_of(tutorial_id)

    # -- lookup ------------------------------------------------------------

    def _get(self, node_id: str, kind: str | None = None) -> ContentNode:
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNodeError(f"no such node {node_id!r}")
        if kind is not None and node.kind != kind:
            raise KindMismatchError(f"{node_id!r} is a {node.kind}, not a {kind}")
        return node

    def node(self, node_id: str) -> ContentNode:
        return self._get(node_id)

    def courses_of(self, tutorial_id: str) -> set[str]:
        tutorial = self._get(tutorial_id, "tutorial")
        out = {c for (c, t) in self.links if t == tutorial_id}
        if tutorial.parent_id is not None:
            out.add(tutorial.parent_id)
        return out

    def tutorials_of(self, course_id: str) -> list[str]:
        """Tutorials under a course: contained ones first, then linked ones."""
        course = self._get(course_id, "course")
        out = list(course.children)
        linked = sorted(t for (c, t) in self.links if c == course_id)
        out.extend(t for t in linked if t not in out)
        return out

    def _ordered_children(self, node_id: str) -> list[ContentNode]:
        node = self._get(node_id)
        kids = [self.nodes[c] for c in node.children]
        kids.sort(key=lambda n: n.order_index)
        return kids

    def lecture_exists(self, lecture_id: str) -> bool:
        node = self.nodes.get(lecture_id)
        return node is not None and node.kind == "lecture"

    # -- the three views ---------------------------------------------------

    def slide_view(self, lecture_id: str) -> list[dict]:
        """Slide-by-slide browsing: every slide with its attachments."""
        self._get(lecture_id, "lecture")
        return [
            {
                "id": s.id,
                "title": s.title,
                "body": s.body,
                "format": s.format,
                "attachments": [
                    {"kind": a.kind, "body": a.body} for a in s.attachments
                ],
            }
            for s in self._ordered_children(lecture_id)
        ]

    def export_lecture(self, lecture_id: str) -> dict:
        """Lecture document: title plus slides in order, attachments excluded."""
        lecture = self._get(lecture_id, "lecture")
        return {
            "title": lecture.title,
            "slides": [
                {"title": s.title, "body": s.body, "format": s.format}
                for s in self._ordered_children(lecture_id)
            ],
        }

    def export_tutorial(self, tutorial_id: str) -> dict:
        """Tutorial handout: every lecture's slides plus all attachments."""
        tutorial = self._get(tutorial_id, "tutorial")
        lectures = []
        for lec in self._ordered_children(tutorial_id):
            lectures.append(
                {
                    "title": lec.title,
                    "slides": [
                        {
                            "title": s.title,
                            "body": s.body,
                            "format": s.format,
                            "attachments": [
                                {"kind": a.kind, "body": a.body}
                                for a in s.attachments
                            ],
                        }
                        for s in self._ordered_children(lec.id)
                    ],
                }
            )
        return {"title": tutorial.title, "lectures": lectures}

    # -- validation --------------------------------------------------------

    def validate(self) -> list[str]:
        """Full-tree pass; returns human-readable violations (empty if clean)."""
        problems: list[str] = []
        for node in self.nodes.values():
            if node.parent_id is None:
                if node.kind != "department":
                    problems.append(f"{node.id}: root node of kind {node.kind}")
                continue
            parent = self.nodes.get(node.parent_id)
            if parent is None:
                problems.append(f"{node.id}: dangling parent {node.parent_id}")
                continue
            if _child_kind(parent.kind) != node.kind:
                problems.append(
                    f"{node.id}: {node.kind} under {parent.kind}"
                )
            if node.attachments and node.kind != "slide":
                problems.append(f"{node.id}: attachments on a {node.kind}")
        for node_id in list(self.nodes) + ["<roots>"]:
            siblings = (
                self.roots if node_id == "<roots>" else self.nodes[node_id].children
            )
            seen: set[int] = set()
            for child in siblings:
                idx = self.nodes[child].order_index
                if idx in seen:
                    problems.append(f"{child}: duplicate order_index {idx}")
                seen.add(idx)
        for course_id, tutorial_id in self.links:
            c = self.nodes.get(course_id)
            t = self.nodes.get(tutorial_id)
            if c is None or c.kind != "course" or t is None or t.kind != "tutorial":
                problems.append(f"bad link {course_id} -> {tutorial_id}")
        return problems

    # -- import/export document -------------------------------------------

    def to_document(self) -> list[dict]:
        """Nested record form of the whole tree (the content file format)."""

        def rec(node: ContentNode) -> dict:
            out = {
                "id": node.id,
                "kind": node.kind,
                "title": node.title,
                "body": node.body,
                "format": node.format,
                "attachments": [
                    {"kind": a.kind, "body": a.body} for a in node.attachments
                ],
                "children": [rec(k) for k in self._ordered_children(node.id)],
            }
            if node.kind == "tutorial":
                out["course_links"] = sorted(
                    c for c in self.courses_of(node.id) if c != node.parent_id
                )
            return out

        roots = sorted((self.nodes[r] for r in self.roots), key=lambda n: n.order_index)
        return [rec(r) for r in roots]

    @classmethod
    def from_document(cls, document: list[dict]) -> "ContentTree":
        tree = cls()
        deferred_links: list[tuple[str, str]] = []

        def walk(record: dict, parent_id: str | None) -> None:
            node_id = tree.add_node(
                parent_id,
                record["kind"],
                record.get("title", ""),
                record.get("body", ""),
                record.get("format", "plain"),
                node_id=record.get("id"),
            )
            for att in record.get("attachments", []):
                tree.attach(node_id, att["kind"], att["body"])
            for child in record.get("children", []):
                walk(child, node_id)
            for course_id in record.get("course_links", []):
                deferred_links.append((node_id, course_id))

        for root in document:
            walk(root, None)
        for tutorial_id, course_id in deferred_links:
            tree.link_tutorial(tutorial_id, course_id)
        # keep generated ids clear of imported ones
        tree._counter = len(tree.nodes)
        return tree
