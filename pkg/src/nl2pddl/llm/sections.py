"""Pull headed sections out of free-form completions."""

from __future__ import annotations

import re

_HEADING = re.compile(r"^\s*#{1,6}\s*(?P<title>.+?)\s*#*\s*$")
_FENCE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)
_SENTINEL = re.compile(r"^\s*(?:[-*]\s*)?no\b[^()]*$", re.IGNORECASE)


class MissingSection(LookupError):
    def __init__(self, heading: str):
        self.heading = heading
        super().__init__(f"completion has no '### {heading}' section")


def _norm(title: str) -> str:
    return " ".join(title.strip().strip(":").lower().split())


def split_sections(completion: str) -> list[tuple[str, str]]:
    """(normalized heading, body) pairs in order; text before any heading is dropped.

    Headings inside fenced blocks are not headings.
    """
    sections: list[tuple[str, list[str]]] = []
    in_fence = False
    for line in completion.splitlines():
        if line.strip().startswith("```"):
            in_fence = not in_fence
        elif not in_fence:
            m = _HEADING.match(line)
            if m:
                sections.append((_norm(m.group("title")), []))
                continue
        if sections:
            sections[-1][1].append(line)
    return [(title, "\n".join(lines)) for title, lines in sections]


def section_block(body: str) -> str:
    """The last fenced block of a section body, else the body itself.

    A body that only states there is nothing ("No new predicates.") yields "".
    """
    fences = _FENCE.findall(body)
    block = (fences[-1] if fences else body).strip()
    if "\n" not in block and _SENTINEL.match(block):
        return ""
    return block


def extract_sections(completion: str, headings: list[str], *,
                     optional: tuple[str, ...] = ()) -> dict[str, str]:
    """Map each heading to its block, taking the last occurrence of a heading.

    Raises MissingSection for an absent heading unless it is listed in
    ``optional``, in which case it maps to "".
    """
    found: dict[str, str] = {}
    for title, body in split_sections(completion):
        found[title] = body
    out = {}
    for heading in headings:
        key = _norm(heading)
        if key not in found:
            if heading in optional:
                out[heading] = ""
                continue
            raise MissingSection(heading)
        out[heading] = section_block(found[key])
    return out
