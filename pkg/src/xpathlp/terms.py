"""Logic terms, substitutions and unification.

Terms are immutable. A substitution is a plain ``dict`` mapping :class:`Var`
to terms. Two application styles exist:

* :func:`apply` replaces variables simultaneously, which is what
  :func:`compose` is defined against;
* :func:`resolve` chases binding chains and is what the resolution engine
  uses for its triangular binding stores.

Substitutions returned by :func:`unify` are idempotent, so both agree on them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import OccursViolation, TermSyntaxError


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    value: Union[str, int]

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True, slots=True)
class Seq:
    """A list ``[i1,...,in|Tail]``; ``tail`` is None for a proper list."""

    items: tuple
    tail: Optional["Term"] = None

    def __post_init__(self):
        items, tail = tuple(self.items), self.tail
        while isinstance(tail, Seq):
            items += tail.items
            tail = tail.tail
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "tail", tail)

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        return format_term(self)


Term = Union[Var, Const, Seq, Compound]
Substitution = dict

NIL = Seq(())


def seq(*items, tail=None):
    """Build a :class:`Seq`, wrapping raw ints/strs as constants."""
    return Seq(tuple(as_term(i) for i in items), tail)


def as_term(x) -> Term:
    if isinstance(x, (Var, Const, Seq, Compound)):
        return x
    if isinstance(x, (int, str)):
        return Const(x)
    if isinstance(x, (list, tuple)):
        return seq(*x)
    raise TypeError(f"cannot convert {x!r} to a term")


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Const):
        return True
    if isinstance(t, Seq):
        return t.tail is None and all(is_ground(i) for i in t.items)
    return all(is_ground(a) for a in t.args)


def variables(t: Term, acc=None) -> list:
    """Variables of ``t`` in first-occurrence order."""
    if acc is None:
        acc = []
    if isinstance(t, Var):
        if t not in acc:
            acc.append(t)
    elif isinstance(t, Seq):
        for i in t.items:
            variables(i, acc)
        if t.tail is not None:
            variables(t.tail, acc)
    elif isinstance(t, Compound):
        for a in t.args:
            variables(a, acc)
    return acc


# ---------------------------------------------------------------------------
# substitution application


def walk(t: Term, s: dict) -> Term:
    while isinstance(t, Var):
        bound = s.get(t)
        if bound is None:
            return t
        t = bound
    return t


def resolve(t: Term, s: dict) -> Term:
    """Apply a triangular binding store completely."""
    t = walk(t, s)
    if isinstance(t, Seq):
        items = tuple(resolve(i, s) for i in t.items)
        tail = None if t.tail is None else resolve(t.tail, s)
        if tail == NIL:
            tail = None
        return Seq(items, tail)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(resolve(a, s) for a in t.args))
    return t


def apply(s: dict, t: Term) -> Term:
    """Simultaneous substitution: each variable is replaced exactly once."""
    if not s:
        return t
    if isinstance(t, Var):
        return s.get(t, t)
    if isinstance(t, Seq):
        items = tuple(apply(s, i) for i in t.items)
        tail = None if t.tail is None else apply(s, t.tail)
        if tail == NIL:
            tail = None
        return Seq(items, tail)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(apply(s, a) for a in t.args))
    return t


def compose(s1: dict, s2: dict) -> dict:
    """The substitution equivalent to applying ``s1`` and then ``s2``."""
    out = {}
    for v, t in s1.items():
        t2 = apply(s2, t)
        if t2 != v:
            out[v] = t2
    for v, t in s2.items():
        if v not in s1 and t != v:
            out[v] = t
    return out


def normalize(s: dict) -> dict:
    """Turn a triangular store into an idempotent substitution."""
    out = {}
    for v in s:
        t = resolve(v, s)
        if t != v:
            out[v] = t
    return out


# ---------------------------------------------------------------------------
# unification


def _occurs(v: Var, t: Term, s: dict) -> bool:
    t = walk(t, s)
    if t == v:
        return True
    if isinstance(t, Seq):
        return any(_occurs(v, i, s) for i in t.items) or (
            t.tail is not None and _occurs(v, t.tail, s))
    if isinstance(t, Compound):
        return any(_occurs(v, a, s) for a in t.args)
    return False


def _bind(v, t, s, occurs_check, trail):
    if occurs_check and _occurs(v, t, s):
        raise OccursViolation(f"{v} occurs in {format_term(resolve(t, s))}")
    s[v] = t
    if trail is not None:
        trail.append(v)
    return s


def unify_into(a: Term, b: Term, s: dict, occurs_check=True, trail=None):
    """Extend the triangular store ``s`` in place; return it, or None on clash.

    Callers that need the original store either pass a copy or a ``trail``
    list, which receives every variable bound (also on failure) so the
    bindings can be undone with :func:`undo`.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, s)
        y = walk(y, s)
        if x is y or x == y:
            continue
        if isinstance(x, Var):
            _bind(x, y, s, occurs_check, trail)
        elif isinstance(y, Var):
            _bind(y, x, s, occurs_check, trail)
        elif isinstance(x, Const) or isinstance(y, Const):
            return None
        elif isinstance(x, Compound):
            if (not isinstance(y, Compound) or x.functor != y.functor
                    or len(x.args) != len(y.args)):
                return None
            stack.extend(zip(x.args, y.args))
        elif isinstance(x, Seq):
            if not isinstance(y, Seq):
                return None
            n = min(len(x.items), len(y.items))
            stack.extend(zip(x.items[:n], y.items[:n]))
            rest_x = Seq(x.items[n:], x.tail)
            rest_y = Seq(y.items[n:], y.tail)
            if rest_x.items:
                if y.tail is None:
                    return None
                stack.append((y.tail, rest_x))
            elif rest_y.items:
                if x.tail is None:
                    return None
                stack.append((x.tail, rest_y))
            else:
                stack.append((x.tail if x.tail is not None else NIL,
                              y.tail if y.tail is not None else NIL))
        else:
            return None
    return s


def undo(s: dict, trail: list, mark: int) -> None:
    """Remove bindings recorded in ``trail`` after position ``mark``."""
    while len(trail) > mark:
        del s[trail.pop()]


def unify(a: Term, b: Term, occurs_check=True) -> Optional[dict]:
    """Most general unifier of ``a`` and ``b`` (idempotent), or None."""
    s = unify_into(a, b, {}, occurs_check)
    return None if s is None else normalize(s)


def rename(t: Term, suffix: str, memo=None) -> Term:
    """Rename every variable apart by appending ``suffix``."""
    if memo is None:
        memo = {}
    if isinstance(t, Var):
        r = memo.get(t)
        if r is None:
            r = memo[t] = Var(t.name + suffix)
        return r
    if isinstance(t, Seq):
        return Seq(tuple(rename(i, suffix, memo) for i in t.items),
                   None if t.tail is None else rename(t.tail, suffix, memo))
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(rename(a, suffix, memo) for a in t.args))
    return t


# ---------------------------------------------------------------------------
# canonical text


def quote(text: str) -> str:
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'").replace(
        "\n", "\\n").replace("\t", "\\t").replace("\r", "\\r") + "'"


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return str(t.value) if isinstance(t.value, int) else quote(t.value)
    if isinstance(t, Seq):
        body = ",".join(format_term(i) for i in t.items)
        if t.tail is not None:
            body += "|" + format_term(t.tail)
        return "[" + body + "]"
    name = t.functor if _PLAIN_ATOM.fullmatch(t.functor) else quote(t.functor)
    return name + "(" + ",".join(format_term(a) for a in t.args) + ")"


_PLAIN_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<str>'(?:[^'\\]|\\.)*')
  | (?P<int>-?\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<neck>:-)
  | (?P<punct>[()\[\],|.])
""", re.VERBOSE)

_UNESCAPE = {"n": "\n", "t": "\t", "r": "\r"}


def _unquote(raw: str) -> str:
    out, i = [], 1
    while i < len(raw) - 1:
        c = raw[i]
        if c == "\\":
            i += 1
            out.append(_UNESCAPE.get(raw[i], raw[i]))
        else:
            out.append(c)
        i += 1
    return "".join(out)


class _TermParser:
    def __init__(self, text):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise TermSyntaxError(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, value=None):
        kind, val, pos = self.peek()
        if kind is None or (value is not None and val != value):
            raise TermSyntaxError(f"expected {value or 'token'}, got {val!r}", pos)
        self.i += 1
        return kind, val, pos

    def term(self):
        kind, val, pos = self.take()
        if kind == "str":
            if self.peek()[1] == "(":
                return self._compound(_unquote(val))
            return Const(_unquote(val))
        if kind == "int":
            return Const(int(val))
        if kind == "var":
            return Var(val)
        if kind == "atom":
            if self.peek()[1] == "(":
                return self._compound(val)
            return Const(val)
        if val == "[":
            items, tail = [], None
            if self.peek()[1] != "]":
                items.append(self.term())
                while self.peek()[1] == ",":
                    self.take(",")
                    items.append(self.term())
                if self.peek()[1] == "|":
                    self.take("|")
                    tail = self.term()
            self.take("]")
            return Seq(tuple(items), tail)
        raise TermSyntaxError(f"unexpected {val!r}", pos)

    def _compound(self, functor):
        self.take("(")
        args = [self.term()]
        while self.peek()[1] == ",":
            self.take(",")
            args.append(self.term())
        self.take(")")
        return Compound(functor, tuple(args))

    def clause(self):
        head = self.term()
        body = []
        if self.peek()[1] == ":-":
            self.take(":-")
            body.append(self.term())
            while self.peek()[1] == ",":
                self.take(",")
                body.append(self.term())
        self.take(".")
        if self.peek()[0] is not None:
            raise TermSyntaxError("trailing input", self.peek()[2])
        return head, body


def parse_term(text: str) -> Term:
    p = _TermParser(text)
    t = p.term()
    if p.peek()[0] is not None:
        raise TermSyntaxError("trailing input", p.peek()[2])
    return t


def parse_clause(text: str):
    """Parse ``head.`` or ``head :- a1, ..., an.`` into (head, [atoms])."""
    return _TermParser(text).clause()
