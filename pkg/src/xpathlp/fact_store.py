"""Fact storage with the two-level index used by retrieval.

Facts live in record order: every fact of a record (a non-terminal element's
attributes and terminal children) is contiguous, and the record's reversed
node number is its *group id*.

* Index1 maps a predicate to its annotations ``pos(n, m)``: fact position
  ``n`` and the position ``m`` where that fact's group starts.
* Index2 maps a fact position to its group start.

Retrieval of ``pred(_, Node, type)`` uses one of two strategies. When the
group the wanted facts must belong to is known (ground) and was already met
during the current evaluation (it is in the :class:`GroupCache`), only that
group is scanned via Index2. Otherwise every Index1 annotation of ``pred``
is visited. Both return the same facts in the same order.

:class:`MemoryFactStore` keeps parsed facts in a list;
:class:`FileFactStore` seeks into ``facts.lp`` through ``offsets.tab`` and
parses one line per access.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import StoreCorrupt, TermSyntaxError
from .terms import Compound, Const, Seq, Var, parse_clause, parse_term, walk
from .translator import Atom, Fact, Program, Rule

FILES = ("facts.lp", "offsets.tab", "index1.tab", "index2.tab", "rules.lp", "registry.tab")


@dataclass
class Counters:
    index1_hits: int = 0      # Index1 annotations visited
    index2_hits: int = 0      # group seeks through Index2
    facts_scanned: int = 0    # fact records read
    facts_touched: int = 0    # facts that unified with a call
    linear_scans: int = 0     # full scans (index disabled)

    def as_dict(self):
        return dict(self.__dict__)


class GroupCache:
    """Group id -> group start position, filled as facts are recovered."""

    def __init__(self):
        self._pos = {}

    def record(self, group: tuple, pos: int) -> bool:
        if group in self._pos:
            return False
        self._pos[group] = pos
        return True

    def get(self, group: tuple) -> Optional[int]:
        return self._pos.get(group)

    def __contains__(self, group):
        return group in self._pos

    def __len__(self):
        return len(self._pos)


@dataclass(frozen=True)
class Access:
    """One fact read during retrieval."""

    strategy: str        # 'index1' | 'index2' | 'scan'
    at: int              # annotation position (index1), group start (index2)
    pos: int             # fact position
    fact: Fact
    group_pos: int


def _ground_ints(items) -> Optional[tuple]:
    out = []
    for t in items:
        if not (isinstance(t, Const) and isinstance(t.value, int)):
            return None
        out.append(t.value)
    return tuple(out)


def group_of_call(node, attribute: bool, s: dict) -> Optional[tuple]:
    """Group id the facts of a call must belong to, if it is ground."""
    node = walk(node, s)
    if not isinstance(node, Seq):
        return None
    items = [walk(i, s) for i in node.items]
    tail = node.tail
    while tail is not None:
        tail = walk(tail, s)
        if isinstance(tail, Seq):
            items += [walk(i, s) for i in tail.items]
            tail = tail.tail
        elif isinstance(tail, Var):
            return None
        else:
            return None
    if not attribute:
        items = items[1:]
    return _ground_ints(items)


class Evaluation:
    """Per-evaluation retrieval state: cache, counters and trace sink."""

    def __init__(self, store: "FactStore", use_index=True, trace=None, use_cache=True):
        self.store = store
        self.use_index = use_index
        self.use_cache = use_index and use_cache
        self.cache = GroupCache()
        self.counters = Counters()
        self.trace = trace
        self.touched = []        # positions of facts that unified, in order

    def retrieve(self, pred: str, node, attribute: bool, s: dict) -> Iterator[Access]:
        store = self.store
        c = self.counters
        if not self.use_index:
            c.linear_scans += 1
            for pos in range(len(store)):
                fact = store.fact(pos)
                c.facts_scanned += 1
                if fact.pred == pred and fact.is_attr == attribute:
                    yield Access("scan", pos, pos, fact, store.group_start(pos))
            return
        group = group_of_call(node, attribute, s) if self.use_cache else None
        start = None if group is None else self.cache.get(group)
        if start is not None:
            c.index2_hits += 1
            pos = start
            while pos < len(store):
                fact = store.fact(pos)
                c.facts_scanned += 1
                if fact.group != group:
                    break
                if fact.pred == pred and fact.is_attr == attribute:
                    yield Access("index2", start, pos, fact, start)
                pos += 1
            return
        for n, m in store.index1.get(pred, ()):
            c.index1_hits += 1
            fact = store.fact(n)
            c.facts_scanned += 1
            if fact.is_attr == attribute:
                yield Access("index1", n, n, fact, m)


class FactStore:
    """Common interface; subclasses provide ``fact(pos)`` and ``__len__``."""

    program: Program
    index1: dict
    index2: list

    def __len__(self):
        return len(self.index2)

    def fact(self, pos: int) -> Fact:
        raise NotImplementedError

    def group_start(self, pos: int) -> int:
        return self.index2[pos]

    def facts(self) -> Iterator[Fact]:
        for pos in range(len(self)):
            yield self.fact(pos)

    def evaluation(self, use_index=True, trace=None, use_cache=True) -> Evaluation:
        ev = Evaluation(self, use_index, trace, use_cache)
        self.last = ev
        return ev

    def counters(self) -> Counters:
        ev = getattr(self, "last", None)
        return ev.counters if ev is not None else Counters()

    def close(self):
        pass


def build_indexes(facts) -> tuple:
    index1, index2 = {}, []
    start, prev = 0, object()
    for n, f in enumerate(facts):
        if f.group != prev:
            start, prev = n, f.group
        index2.append(start)
        index1.setdefault(f.pred, []).append((n, start))
    return index1, index2


class MemoryFactStore(FactStore):
    def __init__(self, program: Program):
        self.program = program
        self._facts = list(program.facts)
        self.index1, self.index2 = build_indexes(self._facts)
        _check_groups(self._facts)

    def fact(self, pos):
        return self._facts[pos]


def _check_groups(facts):
    seen, prev = set(), object()
    for f in facts:
        if f.group != prev:
            if f.group in seen:
                raise StoreCorrupt(f"group {list(f.group)} is not contiguous")
            seen.add(f.group)
            prev = f.group


# ---------------------------------------------------------------------------
# text formats


_FACT_LINE = re.compile(
    r"([a-z][A-Za-z0-9_]*|'(?:[^'\\]|\\.)*')\(('(?:[^'\\]|\\.)*'),\[([0-9,]*)\],(\d+)\)\.")


def _unquote(raw):
    if not raw.startswith("'"):
        return raw
    t = parse_term(raw)
    return t.value


def parse_fact_line(line: str, depth: dict) -> Fact:
    m = _FACT_LINE.fullmatch(line.rstrip("\n"))
    if m is None:
        raise StoreCorrupt(f"malformed fact line {line.rstrip()!r}")
    try:
        pred = _unquote(m.group(1))
        value = parse_term(m.group(2)).value
    except TermSyntaxError as exc:
        raise StoreCorrupt(f"malformed fact line {line.rstrip()!r}: {exc}") from None
    node = tuple(int(x) for x in m.group(3).split(",")) if m.group(3) else ()
    type_ = int(m.group(4))
    is_attr = depth.get(type_) is not None and len(node) == depth[type_] - 1
    group = node if is_attr else node[1:]
    return Fact(pred, value, node, type_, group, is_attr)


def rule_from_text(line: str) -> Rule:
    head, body = parse_clause(line)
    if not (isinstance(head, Compound) and len(head.args) == 3):
        raise StoreCorrupt(f"malformed rule {line!r}")

    def atom(t):
        if not (isinstance(t, Compound) and len(t.args) == 3
                and isinstance(t.args[2], Const)):
            raise StoreCorrupt(f"malformed atom in rule {line!r}")
        return Atom(t.functor, t.args[0], t.args[1], t.args[2].value)

    h = atom(head)
    atoms = [atom(b) for b in body]
    children = tuple(a.pred for a in atoms if a.node != h.node)
    attributes = tuple(a.pred for a in atoms if a.node == h.node)
    if not atoms:
        raise StoreCorrupt(f"rule without body {line!r}")
    return Rule(h, tuple(atoms), children, attributes, atoms[0].type)


def registry_from_text(text: str) -> dict:
    reg = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            tag, rest = line.split(": ", 1)
            pat, types = rest.rsplit(" @ ", 1)
            pattern = parse_term(pat)
            ts = {int(x) for x in types.strip("{}").split(",") if x}
        except (ValueError, TermSyntaxError) as exc:
            raise StoreCorrupt(f"malformed registry line {line!r}: {exc}") from None
        reg.setdefault(_unquote(tag) if tag.startswith("'") else tag, {})[pattern] = ts
    return reg


def write_store(program: Program, directory) -> None:
    """Write ``program`` as a file-backed store under ``directory``."""
    os.makedirs(directory, exist_ok=True)
    index1, index2 = build_indexes(program.facts)
    offsets = []
    with open(os.path.join(directory, "facts.lp"), "wb") as fh:
        for f in program.facts:
            offsets.append(fh.tell())
            fh.write(f"{f}.\n".encode("utf-8"))
    _write(directory, "offsets.tab", "".join(f"{n} {o}\n" for n, o in enumerate(offsets)))
    lines = []
    for pred, annots in index1.items():
        lines.append(f"{pred}: " + " ".join(f"({n},{m})" for n, m in annots) + "\n")
    _write(directory, "index1.tab", "".join(lines))
    _write(directory, "index2.tab", "".join(f"{n} {m}\n" for n, m in enumerate(index2)))
    _write(directory, "rules.lp", program.rules_text())
    _write(directory, "registry.tab", program.registry_text())


def _write(directory, name, text):
    with open(os.path.join(directory, name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read(directory, name):
    path = os.path.join(directory, name)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except FileNotFoundError:
        raise StoreCorrupt(f"missing store file {name}") from None
    except UnicodeDecodeError as exc:
        raise StoreCorrupt(f"{name} is not UTF-8: {exc}") from None


def _int_pairs(text, name):
    out = []
    for k, line in enumerate(text.splitlines()):
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise StoreCorrupt(f"{name} line {k + 1} malformed: {line!r}")
        out.append((int(parts[0]), int(parts[1])))
    return out


_ANNOT = re.compile(r"\((\d+),(\d+)\)")


class FileFactStore(FactStore):
    """A store read from disk; fact records are fetched on demand."""

    def __init__(self, directory):
        self.directory = directory
        rules = []
        for line in _read(directory, "rules.lp").splitlines():
            if line.strip():
                try:
                    rules.append(rule_from_text(line))
                except TermSyntaxError as exc:
                    raise StoreCorrupt(f"malformed rule {line!r}: {exc}") from None
        registry = registry_from_text(_read(directory, "registry.tab"))
        depth = Program(rules, []).depth
        self._depth = depth

        offsets = _int_pairs(_read(directory, "offsets.tab"), "offsets.tab")
        if [n for n, _ in offsets] != list(range(len(offsets))):
            raise StoreCorrupt("offsets.tab is not numbered 0..n-1")
        self._offsets = [o for _, o in offsets]
        index2 = _int_pairs(_read(directory, "index2.tab"), "index2.tab")
        if [n for n, _ in index2] != list(range(len(index2))):
            raise StoreCorrupt("index2.tab is not numbered 0..n-1")
        self.index2 = [m for _, m in index2]
        if len(self.index2) != len(self._offsets):
            raise StoreCorrupt("offsets.tab and index2.tab disagree on the fact count")

        self.index1 = {}
        for k, line in enumerate(_read(directory, "index1.tab").splitlines()):
            if ": " not in line:
                raise StoreCorrupt(f"index1.tab line {k + 1} malformed")
            pred, annots = line.split(": ", 1)
            pairs = [(int(a), int(b)) for a, b in _ANNOT.findall(annots)]
            if " ".join(f"({a},{b})" for a, b in pairs) != annots.strip():
                raise StoreCorrupt(f"index1.tab line {k + 1} malformed")
            self.index1[pred] = pairs

        self._fh = open(os.path.join(directory, "facts.lp"), "rb")
        size = os.fstat(self._fh.fileno()).st_size
        facts = self._validate(size)
        root_tag = _root_tag(rules, facts)
        self.program = Program(rules, facts, registry, root_tag)

    def _validate(self, size):
        facts = []
        self._fh.seek(0)
        data = self._fh.read()
        if self._offsets and self._offsets[-1] >= size:
            raise StoreCorrupt("offsets.tab points past the end of facts.lp")
        lines = data.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        if len(lines) != len(self._offsets):
            raise StoreCorrupt("facts.lp and offsets.tab disagree on the fact count")
        pos = 0
        for n, raw in enumerate(lines):
            if self._offsets[n] != pos:
                raise StoreCorrupt(f"offset of fact {n} is wrong")
            pos += len(raw) + 1
            try:
                facts.append(parse_fact_line(raw.decode("utf-8"), self._depth))
            except UnicodeDecodeError:
                raise StoreCorrupt(f"fact {n} is not UTF-8") from None
        index1, index2 = build_indexes(facts)
        if index1 != self.index1:
            raise StoreCorrupt("index1.tab does not match facts.lp")
        if index2 != self.index2:
            raise StoreCorrupt("index2.tab does not match facts.lp")
        _check_groups(facts)
        return facts

    def fact(self, pos):
        self._fh.seek(self._offsets[pos])
        return parse_fact_line(self._fh.readline().decode("utf-8"), self._depth)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _root_tag(rules, facts):
    for r in rules:
        if r.type == 1:
            return r.tag
    for f in facts:
        if f.type == 1 and not f.is_attr:
            return f.pred
    return None


def open_store(directory) -> FileFactStore:
    if not os.path.isdir(directory):
        raise StoreCorrupt(f"{directory} is not a store directory")
    return FileFactStore(directory)
