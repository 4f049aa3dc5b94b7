"""Line-oriented skill-call grammar emitted by policies.

One action per line, ``skill(key=value, ...)`` with keyword arguments only.
The parser is deliberately tolerant of the cruft language models wrap around
plans: fenced code blocks, list numbering, ``Action:`` prefixes, blank lines
and ``#`` comments are all stripped before parsing.  A few common alias
spellings (``moveto``, ``pickup``) are folded onto the canonical skill names.

Anything else wrong raises :class:`ActionParseError` with a stable ``code``
and the 1-based line / column where parsing stopped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from homegym.constants import MAX_ACTIONS

RELATIONS = ("ontop", "inside")

# skill -> ordered (param, type) pairs; types: int | float | rel | str
SKILL_SIGNATURES: dict[str, tuple[tuple[str, str], ...]] = {
    "move": (("object_index", "int"),),
    "turn": (("yaw", "float"),),
    "pick_up": (("object_index", "int"),),
    "place": (("object_index", "int"), ("relation", "rel")),
    "move_forward": (("distance", "float"),),
    "open": (("object_index", "int"),),
    "close": (("object_index", "int"),),
    "toggle_on": (("object_index", "int"),),
    "toggle_off": (("object_index", "int"),),
    "heat_object_with_source": (("object_index", "int"), ("source_index", "int")),
    "cook_object_with_tool": (("object_index", "int"), ("source_index", "int")),
    "froze_object_with_source": (("object_index", "int"), ("source_index", "int")),
    "go_to_room": (("room_name", "str"),),
}

ALIASES = {
    "moveto": "move",
    "pickup": "pick_up",
    "turn_on": "toggle_on",
    "turn_off": "toggle_off",
}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PREFIX = re.compile(r"^(?:action\s*:|\d+[.)]|[-*+])\s*", re.IGNORECASE)
_INT = re.compile(r"[+-]?\d+$")
_FLOAT = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class Action:
    skill: str
    args: tuple[tuple[str, object], ...]

    def arg(self, name: str) -> object:
        for k, v in self.args:
            if k == name:
                return v
        raise KeyError(name)

    @property
    def kwargs(self) -> dict[str, object]:
        return dict(self.args)


class ActionParseError(ValueError):
    """``code`` is one of: empty_plan, too_many_actions, malformed_line,
    unknown_skill, bad_arguments."""

    def __init__(self, code: str, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {code}: {message}")
        self.code = code
        self.line = line
        self.col = col


@dataclass
class _Scanner:
    text: str
    line_no: int
    pos: int = 0
    errors: list[str] = field(default_factory=list)

    def error(self, code: str, message: str) -> ActionParseError:
        return ActionParseError(code, self.line_no, self.pos + 1, message)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error("malformed_line", f"expected {ch!r}")
        self.pos += 1

    def ident(self) -> str:
        m = _IDENT.match(self.text, self.pos)
        if not m:
            raise self.error("malformed_line", "expected an identifier")
        self.pos = m.end()
        return m.group(0)

    def value_token(self) -> str:
        if self.peek() in "'\"":
            quote = self.text[self.pos]
            end = self.text.find(quote, self.pos + 1)
            if end < 0:
                raise self.error("malformed_line", "unterminated string")
            token = self.text[self.pos + 1 : end]
            self.pos = end + 1
            return token
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in ",) \t":
            self.pos += 1
        if self.pos == start:
            raise self.error("malformed_line", "expected a value")
        return self.text[start : self.pos]


def _strip_noise(raw: str) -> list[tuple[int, str]]:
    """Remove fences/comments/prefixes; return (line_no, payload) pairs."""
    lines: list[tuple[int, str]] = []
    for idx, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith("```"):
            continue
        stripped = _PREFIX.sub("", stripped).strip()
        if stripped:
            lines.append((idx, stripped))
    return lines


def _coerce(scanner: _Scanner, skill: str, name: str, kind: str, token: str, quoted_ok: bool) -> object:
    if kind == "int":
        if _INT.match(token):
            return int(token)
        raise scanner.error("bad_arguments", f"{skill}: {name} must be an integer, got {token!r}")
    if kind == "float":
        if _INT.match(token) or _FLOAT.match(token):
            return float(token)
        raise scanner.error("bad_arguments", f"{skill}: {name} must be a number, got {token!r}")
    if kind == "rel":
        if token in RELATIONS:
            return token
        raise scanner.error("bad_arguments", f"{skill}: {name} must be one of {RELATIONS}, got {token!r}")
    return token if quoted_ok else token


def parse_line(payload: str, line_no: int) -> Action:
    sc = _Scanner(payload, line_no)
    sc.skip_ws()
    name = sc.ident()
    skill = ALIASES.get(name, name)
    if skill not in SKILL_SIGNATURES:
        raise ActionParseError("unknown_skill", line_no, 1, f"unknown skill {name!r}")
    sc.skip_ws()
    sc.expect("(")
    signature = SKILL_SIGNATURES[skill]
    expected = {p: k for p, k in signature}
    got: dict[str, object] = {}
    sc.skip_ws()
    if sc.peek() != ")":
        while True:
            sc.skip_ws()
            key = sc.ident()
            sc.skip_ws()
            sc.expect("=")
            sc.skip_ws()
            quoted = sc.peek() in "'\""
            token = sc.value_token()
            if key not in expected:
                raise sc.error("bad_arguments", f"{skill}: unexpected argument {key!r}")
            if key in got:
                raise sc.error("bad_arguments", f"{skill}: duplicate argument {key!r}")
            got[key] = _coerce(sc, skill, key, expected[key], token, quoted)
            sc.skip_ws()
            if sc.peek() == ",":
                sc.pos += 1
                continue
            break
    sc.expect(")")
    sc.skip_ws()
    if not sc.eof():
        raise sc.error("malformed_line", "trailing text after call")
    missing = [p for p, _ in signature if p not in got]
    if missing:
        raise ActionParseError(
            "bad_arguments", line_no, 1, f"{skill}: missing argument(s) {missing}"
        )
    return Action(skill, tuple((p, got[p]) for p, _ in signature))


def parse_actions(text: str, max_actions: int = MAX_ACTIONS) -> list[Action]:
    if not isinstance(text, str):
        raise ActionParseError("malformed_line", 1, 1, "plan must be text")
    lines = _strip_noise(text)
    if not lines:
        raise ActionParseError("empty_plan", 1, 1, "no actions found")
    if len(lines) > max_actions:
        raise ActionParseError(
            "too_many_actions", lines[max_actions][0], 1,
            f"plan has {len(lines)} actions, limit {max_actions}",
        )
    return [parse_line(payload, line_no) for line_no, payload in lines]


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        raise TypeError("boolean action arguments are not part of the grammar")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if _IDENT.fullmatch(text):
        return text
    return '"' + text.replace('"', "'") + '"'


def format_action(action: Action) -> str:
    args = ", ".join(f"{k}={_format_value(v)}" for k, v in action.args)
    return f"{action.skill}({args})"


def format_actions(actions: list[Action]) -> str:
    return "\n".join(format_action(a) for a in actions) + "\n"
