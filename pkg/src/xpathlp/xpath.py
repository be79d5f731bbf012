"""Parser and printer for the supported XPath subset.

Grammar (absolute queries)::

    query  := ('/' | '//') step (('/' | '//') step)*
    step   := name | name '[' cond ']' | '@' name | 'text()' | '*'
    cond   := conj ('or' conj)*
    conj   := atom ('and' atom)*
    atom   := '(' cond ')' | relpath | name '=' literal | '@' name '=' literal

Relative paths inside conditions use only ``name``/``name[cond]`` steps and
may end in ``@name``. Literals are quoted strings or bare numbers, both kept
as text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import QueryParseError, UnsupportedFeature
from .xml_model import UNLABELED


@dataclass(frozen=True)
class Tag:
    name: str


@dataclass(frozen=True)
class TagCond:
    name: str
    cond: "Cond"


@dataclass(frozen=True)
class Attr:
    name: str


@dataclass(frozen=True)
class Text:
    pass


@dataclass(frozen=True)
class Wildcard:
    pass


@dataclass(frozen=True)
class DescendantTag:
    name: str


Step = Union[Tag, TagCond, Attr, Text, Wildcard, DescendantTag]


@dataclass(frozen=True)
class TagEq:
    tag: str
    value: str


@dataclass(frozen=True)
class AttrEq:
    att: str
    value: str


@dataclass(frozen=True)
class And:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class Or:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class Path:
    expr: "XPathExpr"


Cond = Union[TagEq, AttrEq, And, Or, Path]


@dataclass(frozen=True)
class XPathExpr:
    steps: tuple

    def __str__(self):
        return to_text(self)

    @property
    def last_tag_index(self) -> int:
        """Index of the last element-selecting step."""
        i = len(self.steps) - 1
        if isinstance(self.steps[i], (Attr, Text)):
            i -= 1
        return i

    @property
    def leaf(self):
        """The trailing ``@att``/``text()`` step, or None."""
        last = self.steps[-1]
        return last if isinstance(last, (Attr, Text)) else None


def step_name(step) -> str:
    return "*" if isinstance(step, Wildcard) else step.name


def is_core(q: XPathExpr) -> bool:
    return not any(isinstance(s, (Wildcard, DescendantTag)) for s in q.steps)


# ---------------------------------------------------------------------------
# tokenizer


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<dslash>//)
  | (?P<dotdot>\.\.)
  | (?P<axis>::)
  | (?P<str>"[^"]*"|'[^']*')
  | (?P<num>-?\d+(?:\.\d+)?|-?\.\d+)
  | (?P<name>[A-Za-z_][\w.\-]*)
  | (?P<op>!=|<=|>=|[/\[\]()@=*|<>,.:$])
""", re.VERBOSE)

_UNSUPPORTED_OPS = {"|": "union '|'", "<": "comparison '<'", ">": "comparison '>'",
                    "<=": "comparison '<='", ">=": "comparison '>='",
                    "!=": "comparison '!='", "$": "variables", ",": "function arguments"}


def _tokenize(text):
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QueryParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "dotdot":
            raise UnsupportedFeature("parent step '..' is not supported", pos)
        if kind == "axis":
            raise UnsupportedFeature("axis steps are not supported", pos)
        if kind == "op" and m.group() in _UNSUPPORTED_OPS:
            raise UnsupportedFeature(f"{_UNSUPPORTED_OPS[m.group()]} is not supported", pos)
        if kind != "ws":
            toks.append((kind, m.group(), pos))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of query" if kind == "end" else repr(val)
            raise QueryParseError(f"expected {value!r}, found {found}", pos)

    def fail(self, what):
        kind, val, pos = self.peek()
        found = "end of query" if kind == "end" else repr(val)
        raise QueryParseError(f"expected {what}, found {found}", pos)

    # -- paths

    def query(self) -> XPathExpr:
        steps = []
        kind, val, pos = self.peek()
        if val not in ("/", "//"):
            self.fail("'/' or '//' at start of query")
        while self.peek()[1] in ("/", "//"):
            sep = self.take()[1]
            steps.append(self.step(descendant=(sep == "//")))
        if self.peek()[0] != "end":
            self.fail("'/' or end of query")
        _check_leaf_position(steps, self.toks)
        return XPathExpr(tuple(steps))

    def step(self, descendant=False, nested=False):
        kind, val, pos = self.peek()
        if val == "@":
            self.take()
            if self.peek()[1] == "*":
                raise UnsupportedFeature("'@*' is not supported", self.peek()[2])
            name = self.name()
            if descendant:
                raise UnsupportedFeature("'//' before an attribute is not supported", pos)
            return Attr(name)
        if val == "*":
            self.take()
            if descendant:
                raise UnsupportedFeature("'//*' is not supported", pos)
            if nested:
                raise UnsupportedFeature("'*' inside conditions is not supported", pos)
            if self.peek()[1] == "[":
                raise UnsupportedFeature("conditions on '*' are not supported", self.peek()[2])
            return Wildcard()
        if val == ".":
            raise UnsupportedFeature("self step '.' is not supported", pos)
        if kind == "num" and nested:
            raise UnsupportedFeature("positional predicates are not supported", pos)
        if kind != "name":
            self.fail("a step")
        name = self.take()[1]
        if self.peek()[1] == "(":
            self.take()
            if name != "text":
                raise UnsupportedFeature(f"function {name}() is not supported", pos)
            self.expect(")")
            if descendant:
                raise UnsupportedFeature("'//text()' is not supported", pos)
            if nested:
                raise UnsupportedFeature("text() inside conditions is not supported", pos)
            return Text()
        if name == UNLABELED:
            raise UnsupportedFeature(f"tag name {UNLABELED!r} is reserved", pos)
        if self.peek()[1] == "[":
            bpos = self.take()[2]
            if descendant:
                raise UnsupportedFeature("conditions on '//' steps are not supported", bpos)
            if self.peek()[0] == "num" and self.peek(1)[1] == "]":
                raise UnsupportedFeature("positional predicates are not supported",
                                         self.peek()[2])
            cond = self.cond()
            self.expect("]")
            return TagCond(name, cond)
        return DescendantTag(name) if descendant else Tag(name)

    def name(self) -> str:
        kind, val, pos = self.take()
        if kind != "name":
            raise QueryParseError(f"expected a name, found {val!r}", pos)
        if val == UNLABELED:
            raise UnsupportedFeature(f"tag name {UNLABELED!r} is reserved", pos)
        return val

    # -- conditions

    def cond(self):
        left = self.conj()
        while self.peek()[1] == "or":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.atom()
        while self.peek()[1] == "and":
            self.take()
            left = And(left, self.atom())
        return left

    def atom(self):
        kind, val, pos = self.peek()
        if val == "(":
            self.take()
            c = self.cond()
            self.expect(")")
            return c
        if val == "/" or val == "//":
            raise UnsupportedFeature("absolute paths inside conditions are not supported", pos)
        steps = [self.step(nested=True)]
        while self.peek()[1] in ("/", "//"):
            sep, spos = self.take()[1:]
            if sep == "//":
                raise UnsupportedFeature("'//' inside conditions is not supported", spos)
            steps.append(self.step(nested=True))
        _check_leaf_position(steps, self.toks)
        if self.peek()[1] == "=":
            self.take()
            value = self.literal()
            if len(steps) != 1 or isinstance(steps[0], TagCond):
                raise UnsupportedFeature("equality is supported on a single tag or attribute",
                                         pos)
            if isinstance(steps[0], Attr):
                return AttrEq(steps[0].name, value)
            return TagEq(steps[0].name, value)
        return Path(XPathExpr(tuple(steps)))

    def literal(self) -> str:
        kind, val, pos = self.take()
        if kind == "str":
            return val[1:-1]
        if kind == "num":
            return val
        raise QueryParseError(f"expected a literal, found {val or 'end of query'!r}", pos)


def _check_leaf_position(steps, toks):
    for s in steps[:-1]:
        if isinstance(s, (Attr, Text)):
            kind = "@" + s.name if isinstance(s, Attr) else "text()"
            raise QueryParseError(f"{kind} may only be the last step", 0)


def parse_xpath(q: str) -> XPathExpr:
    return _Parser(q).query()


# ---------------------------------------------------------------------------
# printing


def _quote(value: str) -> str:
    if '"' in value:
        if "'" in value:
            raise ValueError(f"literal {value!r} cannot be quoted")
        return f"'{value}'"
    return f'"{value}"'


def _step_text(s) -> str:
    if isinstance(s, Tag):
        return s.name
    if isinstance(s, TagCond):
        return f"{s.name}[{cond_text(s.cond)}]"
    if isinstance(s, Attr):
        return "@" + s.name
    if isinstance(s, Text):
        return "text()"
    if isinstance(s, Wildcard):
        return "*"
    return s.name


def cond_text(c) -> str:
    if isinstance(c, TagEq):
        return f"{c.tag}={_quote(c.value)}"
    if isinstance(c, AttrEq):
        return f"@{c.att}={_quote(c.value)}"
    if isinstance(c, Path):
        return relative_text(c.expr)
    if isinstance(c, And):
        left = cond_text(c.left)
        if isinstance(c.left, Or):
            left = f"({left})"
        right = cond_text(c.right)
        if isinstance(c.right, (Or, And)):
            right = f"({right})"
        return f"{left} and {right}"
    left = cond_text(c.left)
    right = cond_text(c.right)
    if isinstance(c.right, Or):
        right = f"({right})"
    return f"{left} or {right}"


def relative_text(q: XPathExpr) -> str:
    return "/".join(_step_text(s) for s in q.steps)


def to_text(q: XPathExpr) -> str:
    out = []
    for s in q.steps:
        out.append("//" if isinstance(s, DescendantTag) else "/")
        out.append(_step_text(s))
    return "".join(out)
