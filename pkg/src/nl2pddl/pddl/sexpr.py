"""Tokenizer and s-expression reader with source positions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PDDLSyntaxError

MAX_DEPTH = 128


@dataclass
class Token:
    text: str
    line: int
    col: int

    @property
    def value(self) -> str:
        return self.text.lower()


@dataclass
class SList:
    items: list = field(default_factory=list)
    line: int = 1
    col: int = 1
    start: int = 0
    end: int = 0
    end_line: int = 1


@dataclass
class Comment:
    text: str
    line: int
    offset: int = 0


def read(text: str | bytes) -> tuple[list, list[Comment]]:
    """Read every top-level expression in ``text``.

    Returns the expressions and the ``;`` comments in source order.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise PDDLSyntaxError(f"input is not valid UTF-8 ({exc.reason})") from None

    stack: list[SList] = [SList()]
    comments: list[Comment] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            j = text.find("\n", i)
            j = n if j == -1 else j
            comments.append(Comment(text[i + 1:j].strip(), line, i))
            col += j - i
            i = j
            continue
        if ch == "(":
            if len(stack) > MAX_DEPTH:
                raise PDDLSyntaxError("expression nested too deeply", line, col)
            node = SList(line=line, col=col, start=i)
            stack[-1].items.append(node)
            stack.append(node)
            i += 1
            col += 1
            continue
        if ch == ")":
            if len(stack) == 1:
                raise PDDLSyntaxError("unbalanced ')'", line, col)
            node = stack.pop()
            node.end = i + 1
            node.end_line = line
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        stack[-1].items.append(Token(text[i:j], line, col))
        col += j - i
        i = j
    if len(stack) > 1:
        open_node = stack[-1]
        raise PDDLSyntaxError("unclosed '('", open_node.line, open_node.col, expected="')'")
    return stack[0].items, comments


def tokens_of(text: str) -> list[str]:
    """Flat lower-cased token stream, parentheses included; comments dropped."""
    out: list[str] = []

    def walk(node):
        if isinstance(node, Token):
            out.append(node.value)
        else:
            out.append("(")
            for item in node.items:
                walk(item)
            out.append(")")

    nodes, _ = read(text)
    for node in nodes:
        walk(node)
    return out
