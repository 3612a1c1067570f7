"""Parser and renderer for premise-list tactics (``rw [p1, p2] at h`` and friends)."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .core import ProofSearchError

# longest alternatives first so `rwa` is not read as `rw` + `a`
FAMILIES = ("equiv_rw", "assoc_rw", "simp_rw", "simpa", "dsimp", "simp", "erw", "rwa", "rw")
REWRITE_FAMILIES = frozenset({"rw", "erw", "rwa", "equiv_rw", "assoc_rw", "simp_rw"})
SIMP_FAMILIES = frozenset({"simp", "dsimp", "simpa"})
ONLY_FAMILIES = frozenset({"simp", "dsimp", "simpa"})

_HEAD_RE = re.compile(r"\s*(" + "|".join(FAMILIES) + r")(?![\w'])(\s+only(?![\w']))?\s*")
_OPEN = {"[": "]", "(": ")", "{": "}", "⟨": "⟩"}
_CLOSE = {v: k for k, v in _OPEN.items()}
_REVERSE_MARKERS = ("←", "<-")


class MalformedBrackets(ProofSearchError):
    pass


class NotDecomposable(ProofSearchError):
    """The tactic is not one of the premise-list shapes we know how to split."""


@dataclass(frozen=True)
class Premise:
    name: str
    reversed: bool = False

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty premise")
        _check_balanced(self.name)

    def render(self) -> str:
        return f"← {self.name}" if self.reversed else self.name


@dataclass(frozen=True)
class TacticAst:
    family: str
    premises: tuple[Premise, ...]
    only_modifier: bool = False
    location: str | None = None
    trailing: str | None = None

    def render(self) -> str:
        parts = [self.family]
        if self.only_modifier:
            parts.append("only")
        parts.append("[" + ", ".join(p.render() for p in self.premises) + "]")
        if self.location:
            parts.append(f"at {self.location}")
        if self.trailing:
            parts.append(self.trailing)
        return " ".join(parts)

    def with_premises(self, premises) -> "TacticAst":
        return replace(self, premises=tuple(premises))

    def singles(self) -> list["TacticAst"]:
        return [self.with_premises([p]) for p in self.premises]

    @property
    def is_rewrite_family(self) -> bool:
        return self.family in REWRITE_FAMILIES

    @property
    def is_simp_family(self) -> bool:
        return self.family in SIMP_FAMILIES

    def __str__(self):
        return self.render()


def _check_balanced(text: str) -> None:
    stack = []
    for ch in text:
        if ch in _OPEN:
            stack.append(_OPEN[ch])
        elif ch in _CLOSE:
            if not stack or stack.pop() != ch:
                raise MalformedBrackets(f"unbalanced {ch!r} in {text!r}")
    if stack:
        raise MalformedBrackets(f"unclosed bracket in {text!r}")


def _matching_close(text: str, start: int) -> int:
    """Index of the bracket closing the one opened at ``start``."""
    stack = []
    for i in range(start, len(text)):
        ch = text[i]
        if ch in _OPEN:
            stack.append(_OPEN[ch])
        elif ch in _CLOSE:
            if not stack or stack.pop() != ch:
                raise MalformedBrackets(f"unbalanced {ch!r} at column {i} in {text!r}")
            if not stack:
                return i
    raise MalformedBrackets(f"unclosed bracket opened at column {start} in {text!r}")


def split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on ``sep`` where it is not nested inside any bracket pair."""
    parts, depth, buf = [], 0, []
    for ch in text:
        if ch in _OPEN:
            depth += 1
        elif ch in _CLOSE:
            depth -= 1
            if depth < 0:
                raise MalformedBrackets(f"unbalanced {ch!r} in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    if depth != 0:
        raise MalformedBrackets(f"unclosed bracket in {text!r}")
    parts.append("".join(buf))
    return parts


def _parse_premise(raw: str) -> Premise:
    text = " ".join(raw.split())
    for marker in _REVERSE_MARKERS:
        if text.startswith(marker):
            name = text[len(marker):].strip()
            if not name:
                raise NotDecomposable(f"rewrite arrow without a premise in {raw!r}")
            return Premise(name, reversed=True)
    return Premise(text)


def _has_top_level_sequencing(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        if ch in _OPEN:
            depth += 1
        elif ch in _CLOSE:
            depth -= 1
        elif depth == 0 and (ch in ",;" or text.startswith("<|>", i)):
            return True
    return False


def parse_tactic(text: str) -> TacticAst:
    """Parse a premise-list tactic.

    Raises NotDecomposable for anything outside the supported shapes and
    MalformedBrackets when the premise list does not balance.
    """
    m = _HEAD_RE.match(text)
    if not m or m.end() >= len(text) or text[m.end()] != "[":
        raise NotDecomposable(text)
    family, only = m.group(1), bool(m.group(2))
    if only and family not in ONLY_FAMILIES:
        raise NotDecomposable(text)
    open_at = m.end()
    close_at = _matching_close(text, open_at)
    inner = text[open_at + 1:close_at]
    if not inner.strip():
        raise NotDecomposable(text)
    items = split_top_level(inner)
    if any(not item.strip() for item in items):
        raise NotDecomposable(text)
    premises = tuple(_parse_premise(item) for item in items)

    rest = " ".join(text[close_at + 1:].split())
    if _has_top_level_sequencing(rest):
        raise NotDecomposable(text)
    location = None
    if rest.startswith("at "):
        loc_tokens = []
        tokens = rest[3:].split(" ")
        while tokens and not tokens[0].startswith("{") and tokens[0] not in ("using", "with"):
            loc_tokens.append(tokens.pop(0))
        if not loc_tokens:
            raise NotDecomposable(text)
        location = " ".join(loc_tokens)
        rest = " ".join(tokens)
    trailing = rest or None
    if trailing is not None:
        if not (trailing.startswith("{") or trailing.startswith(("using ", "with "))):
            raise NotDecomposable(text)
        _check_balanced(trailing)
    return TacticAst(family, premises, only, location, trailing)


def try_parse_tactic(text: str) -> TacticAst | None:
    try:
        return parse_tactic(text)
    except (NotDecomposable, MalformedBrackets):
        return None


def normalize_tactic(text: str) -> str:
    """Normalized spelling of a premise-list tactic; other tactics are whitespace-collapsed."""
    ast = try_parse_tactic(text)
    if ast is None:
        return " ".join(text.split())
    return ast.render()
