"""Parser for the typed-STRIPS subset of PDDL.

Parsing is syntax-only: arity, typing and variable-binding faults are left
for the validator so that broken LLM output can still be inspected.
"""

from __future__ import annotations

import re

from .errors import EmptyGoal, MalformedSignature, PDDLError, PDDLSyntaxError, UnsupportedFeature
from .model import EQUALITY, ROOT_TYPE, Action, Atom, Domain, Literal, Predicate, Problem, TypedParam
from .sexpr import Comment, SList, Token, read

SUPPORTED_REQUIREMENTS = (":strips", ":typing", ":negative-preconditions", ":equality")

UNSUPPORTED_CONNECTIVES = {
    "or", "imply", "exists", "forall", "when", "either", "preference",
    "increase", "decrease", "assign", "scale-up", "scale-down",
    "<", ">", "<=", ">=",
}

UNSUPPORTED_SECTIONS = {
    ":functions", ":derived", ":durative-action", ":constraints", ":metric",
    ":process", ":event", ":method", ":task", ":tasks", ":htn",
}

_IDENT = re.compile(r"^[a-z_][a-z0-9_\-]*$")


def _where(node) -> tuple[int, int]:
    return node.line, node.col


def _fail(message: str, node=None, expected: str | None = None) -> PDDLSyntaxError:
    if node is None:
        return PDDLSyntaxError(message, expected=expected)
    return PDDLSyntaxError(message, *_where(node), expected=expected)


def _token(node, what: str) -> str:
    if not isinstance(node, Token):
        raise _fail(f"expected {what}, found '('", node, expected=what)
    return node.value


def _slist(node, what: str) -> SList:
    if not isinstance(node, SList):
        raise _fail(f"expected {what}, found {node.text!r}", node, expected=what)
    return node


def _head(node: SList) -> str | None:
    if node.items and isinstance(node.items[0], Token):
        return node.items[0].value
    return None


def _define_header(text, kind: str) -> tuple[str, list, list[Comment], str]:
    nodes, comments = read(text)
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if not nodes:
        raise PDDLSyntaxError("empty input", expected="'(define'")
    if len(nodes) > 1:
        raise _fail("unexpected content after the define block", nodes[1])
    root = _slist(nodes[0], "'(define'")
    if _head(root) != "define":
        raise _fail("expected 'define'", root, expected="define")
    if len(root.items) < 2:
        raise _fail(f"missing ({kind} <name>) header", root, expected=f"({kind} <name>)")
    header = _slist(root.items[1], f"({kind} <name>)")
    if _head(header) != kind or len(header.items) != 2:
        raise _fail(f"expected ({kind} <name>)", header, expected=f"({kind} <name>)")
    name = _token(header.items[1], f"{kind} name")
    return name, root.items[2:], comments, text


def parse_typed_list(items: list, default: str = ROOT_TYPE) -> list[tuple[str, str, Token]]:
    """Parse ``a b - t c`` into ``[(a, t), (b, t), (c, object)]`` (plus tokens)."""
    out: list[tuple[str, str, Token]] = []
    pending: list[Token] = []
    i = 0
    while i < len(items):
        node = items[i]
        if isinstance(node, SList):
            if _head(node) == "either":
                raise UnsupportedFeature("either", node.line)
            raise _fail("unexpected '(' in typed list", node)
        if node.value == "-":
            if i + 1 >= len(items):
                raise _fail("'-' without a type", node, expected="type name")
            type_node = items[i + 1]
            if isinstance(type_node, SList) and _head(type_node) == "either":
                raise UnsupportedFeature("either", type_node.line)
            type_name = _token(type_node, "type name")
            if not pending:
                raise _fail("type given without names", node)
            out.extend((tok.value, type_name, tok) for tok in pending)
            pending = []
            i += 2
            continue
        pending.append(node)
        i += 1
    out.extend((tok.value, default, tok) for tok in pending)
    return out


def _params(items: list) -> tuple[TypedParam, ...]:
    return tuple(TypedParam(name, type_name) for name, type_name, _ in parse_typed_list(items))


def _atom(node: SList) -> Atom:
    pred = _token(node.items[0], "predicate name") if node.items else None
    if pred is None:
        raise _fail("empty atom", node, expected="predicate name")
    args = tuple(_token(arg, "argument") for arg in node.items[1:])
    return Atom(pred, args)


def _single_node(text: str):
    nodes, _ = read(text)
    if len(nodes) != 1:
        raise PDDLSyntaxError(f"expected one expression, found {len(nodes)}")
    return nodes[0]


def parse_condition(node, *, allow_equality: bool = True) -> tuple[Literal, ...]:
    """Flatten a conjunction of (possibly negated) atoms.

    ``node`` may be PDDL text or an already-read expression.
    """
    if isinstance(node, str):
        node = _single_node(node)
    node = _slist(node, "condition")
    if not node.items:
        return ()
    head = _head(node)
    if head is None:
        raise _fail("expected a connective or predicate", node)
    if head in UNSUPPORTED_CONNECTIVES:
        raise UnsupportedFeature(head, node.line)
    if head == "and":
        out: list[Literal] = []
        for child in node.items[1:]:
            out.extend(parse_condition(child, allow_equality=allow_equality))
        return tuple(out)
    if head == "not":
        if len(node.items) != 2:
            raise _fail("'not' takes exactly one atom", node)
        inner = _slist(node.items[1], "atom")
        inner_head = _head(inner)
        if inner_head in ("and", "not") or inner_head in UNSUPPORTED_CONNECTIVES:
            raise UnsupportedFeature(f"negated {inner_head}", inner.line)
        atom = _atom(inner)
        if atom.predicate == EQUALITY and not allow_equality:
            raise _fail("equality is not allowed here", inner)
        return (Literal(atom, False),)
    atom = _atom(node)
    if atom.predicate == EQUALITY and not allow_equality:
        raise _fail("equality is not allowed here", node)
    return (Literal(atom, True),)


def parse_effect(node) -> tuple[Literal, ...]:
    if isinstance(node, str):
        node = _single_node(node)
    return parse_condition(node, allow_equality=False)


def _trailing_comment(node: SList, comments: list[Comment], next_start: int | None) -> str:
    for c in comments:
        if c.line == node.end_line and c.offset >= node.end:
            if next_start is None or c.offset < next_start:
                return c.text
    return ""


def _parse_action(node: SList, text: str) -> Action:
    if len(node.items) < 2:
        raise _fail("action without a name", node, expected="action name")
    name = _token(node.items[1], "action name")
    fields: dict[str, object] = {}
    rest = node.items[2:]
    i = 0
    while i < len(rest):
        key = _token(rest[i], "':parameters', ':precondition' or ':effect'")
        if key not in (":parameters", ":precondition", ":effect"):
            if key in (":duration", ":condition"):
                raise UnsupportedFeature(key, rest[i].line)
            raise _fail(f"unknown action field {key!r}", rest[i],
                        expected="':parameters', ':precondition' or ':effect'")
        if key in fields:
            raise _fail(f"duplicate {key}", rest[i])
        if i + 1 >= len(rest):
            raise _fail(f"missing value for {key}", rest[i])
        fields[key] = rest[i + 1]
        i += 2
    params: tuple[TypedParam, ...] = ()
    if ":parameters" in fields:
        params = _params(_slist(fields[":parameters"], "parameter list").items)
    pre = parse_condition(fields[":precondition"]) if ":precondition" in fields else ()
    eff = parse_effect(fields[":effect"]) if ":effect" in fields else ()
    return Action(name, params, pre, eff, line=node.line)


def parse_domain(text: str | bytes) -> Domain:
    name, sections, comments, source = _define_header(text, "domain")
    requirements: list[str] = []
    types: dict[str, str] = {}
    constants: dict[str, str] = {}
    predicates: list[Predicate] = []
    actions: list[Action] = []
    for section in sections:
        section = _slist(section, "a domain section")
        key = _head(section)
        if key is None:
            raise _fail("expected a section keyword", section)
        if key in UNSUPPORTED_SECTIONS:
            raise UnsupportedFeature(key, section.line)
        if key == ":requirements":
            for tok in section.items[1:]:
                flag = _token(tok, "requirement flag")
                if flag not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(flag, tok.line)
                if flag not in requirements:
                    requirements.append(flag)
        elif key == ":types":
            for type_name, parent, _ in parse_typed_list(section.items[1:]):
                if type_name != ROOT_TYPE:
                    types[type_name] = parent
        elif key == ":constants":
            for obj, type_name, _ in parse_typed_list(section.items[1:]):
                constants[obj] = type_name
        elif key == ":predicates":
            decls = section.items[1:]
            for idx, decl in enumerate(decls):
                decl = _slist(decl, "predicate declaration")
                if not decl.items:
                    raise _fail("empty predicate declaration", decl)
                pname = _token(decl.items[0], "predicate name")
                next_start = decls[idx + 1].start if idx + 1 < len(decls) and isinstance(decls[idx + 1], SList) else None
                desc = _trailing_comment(decl, comments, next_start)
                predicates.append(Predicate(pname, _params(decl.items[1:]), desc,
                                            raw=source[decl.start:decl.end], line=decl.line))
        elif key == ":action":
            actions.append(_parse_action(section, source))
        else:
            raise _fail(f"unknown domain section {key!r}", section)
    return Domain(name, tuple(requirements), types, constants, tuple(predicates), tuple(actions))


def parse_problem(text: str | bytes) -> Problem:
    name, sections, _, _ = _define_header(text, "problem")
    domain_name: str | None = None
    objects: dict[str, str] = {}
    init: list[Atom] = []
    goal: tuple[Literal, ...] | None = None
    for section in sections:
        section = _slist(section, "a problem section")
        key = _head(section)
        if key is None:
            raise _fail("expected a section keyword", section)
        if key in UNSUPPORTED_SECTIONS:
            raise UnsupportedFeature(key, section.line)
        if key == ":domain":
            if len(section.items) != 2:
                raise _fail("expected (:domain <name>)", section)
            domain_name = _token(section.items[1], "domain name")
        elif key == ":requirements":
            for tok in section.items[1:]:
                flag = _token(tok, "requirement flag")
                if flag not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(flag, tok.line)
        elif key == ":objects":
            for obj, type_name, _ in parse_typed_list(section.items[1:]):
                objects[obj] = type_name
        elif key == ":init":
            for item in section.items[1:]:
                item = _slist(item, "initial atom")
                head = _head(item)
                if head == "not":
                    raise _fail("negative literal in :init (closed world)", item, expected="positive atom")
                if head == EQUALITY or head in UNSUPPORTED_CONNECTIVES:
                    raise UnsupportedFeature(head, item.line)
                init.append(_atom(item))
        elif key == ":goal":
            if len(section.items) != 2:
                if len(section.items) == 1:
                    raise EmptyGoal(f"problem {name!r} has an empty goal")
                raise _fail("(:goal) takes exactly one condition", section)
            goal = parse_condition(section.items[1])
        else:
            raise _fail(f"unknown problem section {key!r}", section)
    if domain_name is None:
        raise PDDLSyntaxError("missing (:domain <name>) section", expected="(:domain <name>)")
    if not goal:
        raise EmptyGoal(f"problem {name!r} has an empty goal")
    return Problem(name, domain_name, objects, tuple(init), goal)


def _matching_paren(line: str, start: int) -> int:
    depth = 0
    for i in range(start, len(line)):
        if line[i] == "(":
            depth += 1
        elif line[i] == ")":
            depth -= 1
            if depth == 0:
                return i
    return -1


def parse_predicate_signature(line: str) -> Predicate:
    """Parse ``(name ?a - t ...)`` optionally followed by ``: desc`` or ``; desc``."""
    stripped = line.strip()
    if not stripped.startswith("("):
        raise MalformedSignature(line, "signature must start with '('")
    close = _matching_paren(stripped, 0)
    if close == -1:
        raise MalformedSignature(line, "unbalanced parentheses")
    try:
        nodes, _ = read(stripped[:close + 1])
    except PDDLError as exc:
        raise MalformedSignature(line, str(exc)) from None
    node = nodes[0]
    if not node.items or not isinstance(node.items[0], Token):
        raise MalformedSignature(line, "missing predicate name")
    if any(isinstance(item, SList) for item in node.items):
        raise MalformedSignature(line, "nested expression in signature")
    name = node.items[0].value
    if not _IDENT.match(name):
        raise MalformedSignature(line, f"invalid predicate name {name!r}")
    try:
        typed = parse_typed_list(node.items[1:])
    except PDDLError as exc:
        raise MalformedSignature(line, str(exc)) from None
    params = []
    for pname, ptype, _ in typed:
        if not pname.startswith("?") or len(pname) < 2:
            raise MalformedSignature(line, f"parameter {pname!r} lacks '?'")
        params.append(TypedParam(pname, ptype))
    if len({p.name for p in params}) != len(params):
        raise MalformedSignature(line, "repeated parameter name")
    rest = stripped[close + 1:].strip()
    if rest and rest[0] in ":;":
        desc = rest[1:].strip()
    elif rest:
        raise MalformedSignature(line, f"unexpected trailing text {rest!r}")
    else:
        desc = ""
    return Predicate(name, tuple(params), desc, raw=line)
