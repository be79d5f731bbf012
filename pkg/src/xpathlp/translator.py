"""Numbered XML trees <-> logic programs (schema rules + facts)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import InconsistentAtoms
from .terms import (NIL, Compound, Const, Seq, Term, Var, format_term,
                    is_ground, unify_into, rename, walk)
from .xml_model import UNLABELED, Element, Text, XmlTree


@dataclass(frozen=True)
class Atom:
    pred: str
    value: Term
    node: Term
    type: int

    def term(self) -> Compound:
        return Compound(self.pred, (self.value, self.node, Const(self.type)))

    def __str__(self):
        return format_term(self.term())


@dataclass(frozen=True)
class Fact:
    """A ground unit clause ``pred(value, node, type)``.

    ``node`` is the reversed node number; ``group`` is the reversed node
    number of the record owning the fact.
    """

    pred: str
    value: str
    node: tuple
    type: int
    group: tuple
    is_attr: bool = False

    @property
    def atom(self) -> Atom:
        return Atom(self.pred, Const(self.value),
                    Seq(tuple(Const(i) for i in self.node)), self.type)

    def __str__(self):
        return str(self.atom)


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple
    children: tuple          # child tags, pattern slot order
    attributes: tuple        # attribute names, after the children
    child_type: int

    @property
    def tag(self):
        return self.head.pred

    @property
    def type(self):
        return self.head.type

    @property
    def pattern(self) -> Compound:
        return self.head.value

    def is_attribute_atom(self, atom: Atom) -> bool:
        return atom.node == self.head.node

    def slot_of(self, name: str, attribute=False) -> Optional[Term]:
        """The head-pattern variable holding child ``name`` (or attribute)."""
        if attribute:
            if name not in self.attributes:
                return None
            return self.pattern.args[-1].items[self.attributes.index(name)]
        if name not in self.children:
            return None
        return self.pattern.args[self.children.index(name)]

    def with_body(self, body) -> "Rule":
        return Rule(self.head, tuple(body), self.children, self.attributes,
                    self.child_type)

    def renamed(self, suffix: str) -> "Rule":
        memo = {}
        head = Atom(self.head.pred, rename(self.head.value, suffix, memo),
                    rename(self.head.node, suffix, memo), self.head.type)
        body = tuple(Atom(a.pred, rename(a.value, suffix, memo),
                          rename(a.node, suffix, memo), a.type) for a in self.body)
        return Rule(head, body, self.children, self.attributes, self.child_type)

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- " + ", ".join(str(a) for a in self.body) + "."


@dataclass
class Program:
    rules: list
    facts: list
    registry: dict = field(default_factory=dict)   # tag -> {pattern: set(types)}
    root_tag: Optional[str] = None

    def __post_init__(self):
        self._index()

    def _index(self):
        self.by_child_type = {r.child_type: r for r in self.rules}
        self.depth = {1: 1}
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                if r.type in self.depth and r.child_type not in self.depth:
                    self.depth[r.child_type] = self.depth[r.type] + 1
                    changed = True

    def rules_for(self, tag, type_=None):
        return [r for r in self.rules
                if r.tag == tag and (type_ is None or r.type == type_)]

    @property
    def max_type(self):
        types = [1] + [r.child_type for r in self.rules] + [f.type for f in self.facts]
        return max(types)

    def rules_text(self) -> str:
        return "".join(f"{r}\n" for r in self.rules)

    def facts_text(self) -> str:
        return "".join(f"{f}.\n" for f in self.facts)

    def registry_text(self) -> str:
        lines = []
        for tag in sorted(self.registry):
            for pat, types in self.registry[tag].items():
                ts = ",".join(str(t) for t in sorted(types))
                lines.append(f"{tag}: {format_term(pat)} @ {{{ts}}}\n")
        return "".join(lines)


def pt(tag: str, p: Program) -> list:
    """Patterns registered for ``tag`` (empty for unknown tags)."""
    return list(p.registry.get(tag, {}))


def tn(pattern: Term, p: Program) -> set:
    """Type numbers of ``pattern``; instances share their pattern's set."""
    for pats in p.registry.values():
        for pat, types in pats.items():
            if _instance_of(pattern, pat):
                return set(types)
    return set()


def _instance_of(t, pat):
    if not (isinstance(t, Compound) and isinstance(pat, Compound)):
        return False
    if t.functor != pat.functor or len(t.args) != len(pat.args):
        return False
    return unify_into(rename(pat, "_tn"), t, {}) is not None


# ---------------------------------------------------------------------------
# translation


def var_name(tag: str) -> str:
    ident = re.sub(r"\W", "_", tag)
    if not ident[:1].isalpha():
        ident = "V" + ident
    return ident[0].upper() + ident[1:]


def _unique(name, used):
    while name in used:
        name += "s"
    used.add(name)
    return name


def _make_rule(e: Element, child_type: int) -> Rule:
    children = []
    for c in e.children:
        if c.tag not in children:
            children.append(c.tag)
    attributes = [k for k, _ in e.attrs]
    used = set()
    slot_vars = [Var(_unique(var_name(t), used)) for t in children]
    att_vars = [Var(_unique(var_name(a), used)) for a in attributes]
    node_vars = [Var(_unique("Node" + var_name(t), used)) for t in children]
    head_node = Var(_unique("Node" + var_name(e.tag), used))
    pattern = Compound(e.tag + "type", tuple(slot_vars) + (Seq(tuple(att_vars)),))
    head = Atom(e.tag, pattern, head_node, e.type)
    body = [Atom(t, v, Seq((n,), head_node), child_type)
            for t, v, n in zip(children, slot_vars, node_vars)]
    body += [Atom(a, v, head_node, child_type) for a, v in zip(attributes, att_vars)]
    return Rule(head, tuple(body), tuple(children), tuple(attributes), child_type)


def _rev(node):
    return tuple(reversed(node))


def translate(doc: XmlTree) -> Program:
    """Schema rules and facts for a tree produced by ``number_tree``."""
    root = doc.root
    rules, facts, seen = [], [], set()
    registry = {}

    def register(tag, pattern, type_):
        registry.setdefault(tag, {}).setdefault(pattern, set()).add(type_)

    def terminal_fact(c: Element):
        group = _rev(c.node)[1:]
        facts.append(Fact(c.tag, c.text, _rev(c.node), c.type, group))
        if c.tag != UNLABELED:
            register(c.tag, Compound(c.tag + "type", (Var(var_name(c.tag)), NIL)), c.type)

    def visit(e: Element):
        child_type = e.child_type
        if child_type not in seen:
            seen.add(child_type)
            rule = _make_rule(e, child_type)
            rules.append(rule)
            register(e.tag, rule.pattern, e.type)
        own = _rev(e.node)
        for k, v in e.attrs:
            facts.append(Fact(k, v, own, child_type, own, True))
        for c in e.children:
            if c.tag == UNLABELED or c.is_terminal:
                terminal_fact(c)
        for c in e.children:
            if not (c.tag == UNLABELED or c.is_terminal):
                visit(c)

    if root.is_terminal:
        terminal_fact(root)
    else:
        visit(root)
    return Program(rules, facts, registry, root.tag)


# ---------------------------------------------------------------------------
# reconstruction


class _Builder:
    def __init__(self, rules):
        self.by_child_type = {r.child_type: r for r in rules}
        self.depth = Program(list(rules), []).depth
        self.elements = {}    # doc-order node -> Element
        self.texts = {}       # doc-order node -> Text wrapper element
        self.attr_types = {}  # doc-order node -> child type (attribute owner)

    def _element(self, node, tag, type_):
        e = self.elements.get(node)
        if e is not None:
            if e.tag != tag or e.type != type_:
                raise InconsistentAtoms(f"node {node} is both {e.tag} and {tag}")
            return e
        if node in self.texts:
            raise InconsistentAtoms(f"node {node} is both text and {tag}")
        e = self.elements[node] = Element(tag, [], [], node, type_)
        if type_ != 1:
            parent_rule = self.by_child_type.get(type_)
            if parent_rule is None:
                raise InconsistentAtoms(f"no rule has children of type {type_}")
            self._element(node[:-1], parent_rule.tag, parent_rule.type)
        return e

    def place(self, pred, value, rev_node, type_):
        node = tuple(reversed(rev_node))
        depth = self.depth.get(type_)
        if depth is not None and len(node) == depth - 1:
            rule = self.by_child_type[type_]
            owner = self._element(node, rule.tag, rule.type)
            old = owner.attr(pred)
            if old is None:
                owner.attrs.append((pred, value))
                self.attr_types[node] = type_
            elif old != value:
                raise InconsistentAtoms(f"attribute {pred} of {node}: {old!r} vs {value!r}")
            return
        if pred == UNLABELED:
            old = self.texts.get(node)
            if old is not None and old.text != value:
                raise InconsistentAtoms(f"text at {node}: {old.text!r} vs {value!r}")
            if node in self.elements:
                raise InconsistentAtoms(f"node {node} is both text and element")
            self.texts[node] = Element(UNLABELED, [], [Text(value)], node, type_)
            parent_rule = self.by_child_type[type_]
            self._element(node[:-1], parent_rule.tag, parent_rule.type)
            return
        e = self._element(node, pred, type_)
        if e.children and e.text != value:
            raise InconsistentAtoms(f"value of {pred} at {node}: {e.text!r} vs {value!r}")
        e.children = [Text(value)] if value != "" else []

    def tree(self) -> Optional[XmlTree]:
        if not self.elements:
            return None
        kids = {}
        for node, e in list(self.elements.items()) + list(self.texts.items()):
            if len(node) > 1:
                kids.setdefault(node[:-1], []).append(e)
        for node, e in self.elements.items():
            if node in kids:
                e.children = sorted(kids[node], key=lambda c: c.node)
                e.child_type = e.children[0].type
            else:
                e.child_type = self.attr_types.get(node)
        return XmlTree(self.elements[(1,)])


def rebuild_doc(rules, atoms, facts=()) -> Optional[XmlTree]:
    """Rebuild the (numbered) document described by ``atoms``.

    Ground value atoms are placed directly. Atoms carrying pattern instances
    are unfolded through ``rules`` and resolved against ``facts`` to recover
    node numbers; slots left as variables are missing branches and are not
    followed. Returns None for an empty atom set.
    """
    b = _Builder(rules)
    facts = list(facts)
    for atom in atoms:
        if isinstance(atom, Fact):
            b.place(atom.pred, atom.value, atom.node, atom.type)
            continue
        value, node = atom.value, atom.node
        if isinstance(value, Var):
            continue
        if isinstance(value, Const) and is_ground(node):
            b.place(atom.pred, value.value, tuple(c.value for c in node.items), atom.type)
            continue
        for used in _unfold(atom, rules, facts):
            for f in used:
                b.place(f.pred, f.value, f.node, f.type)
    return b.tree()


def _unfold(atom: Atom, rules, facts):
    """Yield the fact sets proving ``atom`` with variable slots skipped."""
    counter = [0]

    def solve(goals, s, used):
        if not goals:
            yield used
            return
        g, rest = goals[0], goals[1:]
        value = walk(g.value, s)
        if isinstance(value, Var):
            yield from solve(rest, s, used)
            return
        for r in rules:
            if r.tag != g.pred or r.type != g.type:
                continue
            counter[0] += 1
            r = r.renamed(f"_u{counter[0]}")
            s2 = unify_into(r.head.term(), Atom(g.pred, value, g.node, g.type).term(), dict(s))
            if s2 is None:
                continue
            yield from solve(list(r.body) + rest, s2, used)
        for f in facts:
            if f.pred != g.pred or f.type != g.type:
                continue
            s2 = unify_into(f.atom.term(), Atom(g.pred, value, g.node, g.type).term(), dict(s))
            if s2 is not None:
                yield from solve(rest, s2, used + [f])

    yield from solve([atom], {}, [])
