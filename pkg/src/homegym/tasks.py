"""Task definitions: a small s-expression language plus goal evaluation.

A task file looks like::

    ;; Move the apple onto the kitchen table.
    (define (task pickplace_0000)
      (:objects apple_0 - apple)
      (:require (apple_0 grippable))
      (:init (ontop apple_0 counter_0))
      (:goal (and (ontop apple_0 table_0))))

``:objects`` declares the portable items the factory must create; fixtures
(counters, appliances) are referenced by their scene names and resolved at
binding time.  ``format_task`` emits canonical text that re-parses to an
equal definition.

This module also owns predicate semantics over a
:class:`~homegym.world.types.WorldState`; the binary kinds accept either an
explicit parent link or pure pose geometry, so states assembled without
links evaluate the same way.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from homegym.constants import NEAR_DIST
from homegym.geometry import rect_contains_rect, rect_distance, rects_overlap
from homegym.world.types import WorldState

BINARY_PREDICATES = ("ontop", "inside", "under", "nextto")
UNARY_PREDICATES = ("open", "toggled_on", "heated", "cooked", "frozen")
PREDICATES = BINARY_PREDICATES + UNARY_PREDICATES

_EPS = 1e-6
_SYMBOL = re.compile(r"[^()\s;]+")


@dataclass(frozen=True)
class Predicate:
    kind: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return "(" + " ".join((self.kind,) + self.args) + ")"


@dataclass
class TaskDef:
    name: str
    instruction: str = ""
    manifest: list[tuple[str, str]] = field(default_factory=list)  # (symbol, category)
    requirements: list[tuple[str, str]] = field(default_factory=list)  # (symbol, flag)
    init: list[Predicate] = field(default_factory=list)
    goals: list[Predicate] = field(default_factory=list)

    def symbols(self) -> list[str]:
        """Every symbol the task mentions: manifest first, then fixtures in
        order of first appearance in goals, then init."""
        out = [s for s, _ in self.manifest]
        for pred in list(self.goals) + list(self.init):
            for sym in pred.args:
                if sym not in out:
                    out.append(sym)
        return out

    def goal_symbols(self) -> set[str]:
        return {sym for pred in self.goals for sym in pred.args}


class TaskParseError(ValueError):
    """``code``: malformed, unknown_section, unknown_predicate, bad_arity,
    duplicate_symbol, unbound_symbol, empty_goal."""

    def __init__(self, code: str, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {code}: {message}")
        self.code = code
        self.line = line
        self.col = col


class UnboundSymbol(KeyError):
    pass


# -- s-expression scanning --------------------------------------------------


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> tuple[list[_Tok], str]:
    instruction_lines: list[str] = []
    tokens: list[_Tok] = []
    saw_form = False
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(";;") and not saw_form:
            instruction_lines.append(stripped[2:].strip())
            continue
        pos = 0
        while pos < len(line):
            ch = line[pos]
            if ch in " \t":
                pos += 1
                continue
            if ch == ";":
                break
            if ch in "()":
                tokens.append(_Tok(ch, line_no, pos + 1))
                saw_form = True
                pos += 1
                continue
            m = _SYMBOL.match(line, pos)
            if not m:
                raise TaskParseError("malformed", line_no, pos + 1, f"bad character {ch!r}")
            tokens.append(_Tok(m.group(0), line_no, pos + 1))
            saw_form = True
            pos = m.end()
    return tokens, " ".join(instruction_lines).strip()


def _read_sexpr(tokens: list[_Tok], at: int):
    if at >= len(tokens):
        raise TaskParseError("malformed", 0, 0, "unexpected end of input")
    tok = tokens[at]
    if tok.text == "(":
        items = []
        at += 1
        while True:
            if at >= len(tokens):
                raise TaskParseError("malformed", tok.line, tok.col, "unclosed parenthesis")
            if tokens[at].text == ")":
                return (items, tok), at + 1
            node, at = _read_sexpr(tokens, at)
            items.append(node)
    if tok.text == ")":
        raise TaskParseError("malformed", tok.line, tok.col, "unbalanced ')'")
    return tok, at + 1


def _as_symbol(node, what: str) -> _Tok:
    if isinstance(node, _Tok):
        return node
    head = node[1]
    raise TaskParseError("malformed", head.line, head.col, f"expected {what}, got a list")


def _parse_predicate(node) -> Predicate:
    if isinstance(node, _Tok):
        raise TaskParseError("malformed", node.line, node.col, "expected a predicate list")
    items, head = node
    if not items:
        raise TaskParseError("malformed", head.line, head.col, "empty predicate")
    kind_tok = _as_symbol(items[0], "a predicate name")
    kind = kind_tok.text
    if kind not in PREDICATES:
        raise TaskParseError(
            "unknown_predicate", kind_tok.line, kind_tok.col, f"unknown predicate {kind!r}"
        )
    args = tuple(_as_symbol(a, "a symbol").text for a in items[1:])
    arity = 2 if kind in BINARY_PREDICATES else 1
    if len(args) != arity:
        raise TaskParseError(
            "bad_arity", kind_tok.line, kind_tok.col,
            f"{kind} takes {arity} argument(s), got {len(args)}",
        )
    return Predicate(kind, args)


def parse_task(text: str, known_symbols: set[str] | None = None) -> TaskDef:
    tokens, instruction = _tokenize(text)
    if not tokens:
        raise TaskParseError("malformed", 1, 1, "no task form found")
    root, at = _read_sexpr(tokens, 0)
    if at != len(tokens):
        extra = tokens[at]
        raise TaskParseError("malformed", extra.line, extra.col, "trailing tokens after task form")
    if isinstance(root, _Tok):
        raise TaskParseError("malformed", root.line, root.col, "expected (define ...)")
    items, head = root
    if len(items) < 2 or not isinstance(items[0], _Tok) or items[0].text != "define":
        raise TaskParseError("malformed", head.line, head.col, "expected (define (task name) ...)")
    name_form = items[1]
    if (
        isinstance(name_form, _Tok)
        or len(name_form[0]) != 2
        or _as_symbol(name_form[0][0], "task").text != "task"
    ):
        raise TaskParseError("malformed", head.line, head.col, "expected (task name)")
    task = TaskDef(name=_as_symbol(name_form[0][1], "a task name").text, instruction=instruction)

    seen_sections: set[str] = set()
    for section in items[2:]:
        if isinstance(section, _Tok):
            raise TaskParseError("malformed", section.line, section.col, "expected a (:section ...)")
        sec_items, sec_head = section
        if not sec_items:
            raise TaskParseError("malformed", sec_head.line, sec_head.col, "empty section")
        tag_tok = _as_symbol(sec_items[0], "a section tag")
        tag = tag_tok.text
        if tag in seen_sections:
            raise TaskParseError("malformed", tag_tok.line, tag_tok.col, f"duplicate section {tag}")
        seen_sections.add(tag)
        body = sec_items[1:]
        if tag == ":objects":
            pending: list[_Tok] = []
            i = 0
            while i < len(body):
                tok = _as_symbol(body[i], "a symbol")
                if tok.text == "-":
                    if not pending or i + 1 >= len(body):
                        raise TaskParseError("malformed", tok.line, tok.col, "dangling '-' in :objects")
                    cat = _as_symbol(body[i + 1], "a category").text
                    for sym in pending:
                        if any(sym.text == s for s, _ in task.manifest):
                            raise TaskParseError(
                                "duplicate_symbol", sym.line, sym.col, f"duplicate symbol {sym.text!r}"
                            )
                        task.manifest.append((sym.text, cat))
                    pending = []
                    i += 2
                else:
                    pending.append(tok)
                    i += 1
            if pending:
                tok = pending[0]
                raise TaskParseError("malformed", tok.line, tok.col, "symbols without a category")
        elif tag == ":require":
            for entry in body:
                if isinstance(entry, _Tok):
                    raise TaskParseError(
                        "malformed", entry.line, entry.col, "expected (symbol flag)"
                    )
                pair, pair_head = entry
                if len(pair) != 2:
                    raise TaskParseError(
                        "malformed", pair_head.line, pair_head.col, "expected (symbol flag)"
                    )
                task.requirements.append(
                    (_as_symbol(pair[0], "a symbol").text, _as_symbol(pair[1], "a flag").text)
                )
        elif tag == ":init":
            task.init = [_parse_predicate(p) for p in body]
        elif tag == ":goal":
            if len(body) != 1:
                raise TaskParseError(
                    "malformed", sec_head.line, sec_head.col, ":goal takes a single (and ...) form"
                )
            goal_form = body[0]
            if isinstance(goal_form, _Tok) or not goal_form[0] or not (
                isinstance(goal_form[0][0], _Tok) and goal_form[0][0].text == "and"
            ):
                raise TaskParseError("malformed", sec_head.line, sec_head.col, "expected (and ...)")
            task.goals = [_parse_predicate(p) for p in goal_form[0][1:]]
        else:
            raise TaskParseError(
                "unknown_section", tag_tok.line, tag_tok.col, f"unknown section {tag!r}"
            )

    if not task.goals:
        raise TaskParseError("empty_goal", head.line, head.col, "task has no goals")
    if known_symbols is not None:
        declared = {s for s, _ in task.manifest} | set(known_symbols)
        for pred in task.init + task.goals + [
            Predicate("open", (sym,)) for sym, _ in task.requirements
        ]:
            for sym in pred.args:
                if sym not in declared:
                    raise TaskParseError(
                        "unbound_symbol", head.line, head.col, f"unknown symbol {sym!r}"
                    )
    return task


def format_task(task: TaskDef) -> str:
    lines: list[str] = []
    if task.instruction:
        lines.append(";; " + task.instruction)
    lines.append(f"(define (task {task.name})")
    if task.manifest:
        parts = " ".join(f"{sym} - {cat}" for sym, cat in task.manifest)
        lines.append(f"  (:objects {parts})")
    if task.requirements:
        parts = " ".join(f"({sym} {flag})" for sym, flag in task.requirements)
        lines.append(f"  (:require {parts})")
    if task.init:
        parts = " ".join(str(p) for p in task.init)
        lines.append(f"  (:init {parts})")
    parts = " ".join(str(p) for p in task.goals)
    lines.append(f"  (:goal (and {parts})))")
    return "\n".join(lines) + "\n"


# -- binding and evaluation -------------------------------------------------


def bind_symbols(task: TaskDef, state: WorldState) -> dict[str, int]:
    """Resolve every symbol the task mentions to an object id by name."""
    by_name = {o.name: o.id for o in state.objects}
    binding: dict[str, int] = {}
    for sym in task.symbols():
        if sym not in by_name:
            raise UnboundSymbol(sym)
        binding[sym] = by_name[sym]
    return binding


def eval_predicate(state: WorldState, kind: str, ids: tuple[int, ...]) -> bool:
    objs = state.objects
    if kind in UNARY_PREDICATES:
        return bool(getattr(objs[ids[0]], kind))
    a, b = objs[ids[0]], objs[ids[1]]
    if a.id == b.id:
        return False
    if kind == "ontop":
        if a.parent == (b.id, "ontop"):
            return True
        return abs(a.pose.z - b.top_z) <= _EPS and rect_contains_rect(
            b.footprint(), a.footprint(), eps=_EPS
        )
    if kind == "inside":
        if a.parent == (b.id, "inside"):
            return True
        return (
            b.has("container")
            and rect_contains_rect(b.footprint(), a.footprint(), eps=_EPS)
            and a.pose.z >= b.pose.z - _EPS
            and a.top_z <= b.top_z + _EPS
        )
    if kind == "under":
        return a.top_z <= b.pose.z + _EPS and rects_overlap(a.footprint(), b.footprint())
    if kind == "nextto":
        return rect_distance(a.footprint(), b.footprint()) <= NEAR_DIST + _EPS
    raise ValueError(f"unknown predicate kind {kind!r}")


def goal_results(state: WorldState, task: TaskDef, binding: dict[str, int]) -> list[bool]:
    out: list[bool] = []
    for pred in task.goals:
        try:
            ids = tuple(binding[s] for s in pred.args)
        except KeyError as exc:
            raise UnboundSymbol(exc.args[0]) from exc
        out.append(eval_predicate(state, pred.kind, ids))
    return out


def init_results(state: WorldState, task: TaskDef, binding: dict[str, int]) -> list[bool]:
    out: list[bool] = []
    for pred in task.init:
        ids = tuple(binding[s] for s in pred.args)
        out.append(eval_predicate(state, pred.kind, ids))
    return out


def check_requirements(task: TaskDef, binding: dict[str, int], state: WorldState) -> list[str]:
    """Returns the unmet (symbol, flag) requirements, formatted for humans."""
    problems = []
    for sym, flag in task.requirements:
        obj = state.objects[binding[sym]]
        if not obj.has(flag):
            problems.append(f"{sym} lacks {flag}")
    return problems
