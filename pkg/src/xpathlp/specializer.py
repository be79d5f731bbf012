"""Query-driven program transformations.

* :func:`fe` drops the constants of a query (the free-of-equalities form).
* :func:`expand` rewrites ``//`` and ``*`` into the core queries the schema
  allows.
* :func:`specialize_rules` keeps, for every rule on the query path, only
  the body atoms the query can reach.
* :func:`reorder` moves condition atoms to the front of their rule body.
* :func:`pt_query` / :func:`goals` build the instantiated query patterns and
  the goals evaluated against the program.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import EmptySpecialization
from .terms import Const, Var, apply, variables
from .translator import Atom, Program, Rule, var_name
from .xml_model import UNLABELED
from .xpath import (Attr, AttrEq, Or, Path, Tag, TagCond, TagEq, Text, Wildcard,
                    XPathExpr, to_text)


# ---------------------------------------------------------------------------
# schema view


class Schema:
    """Element kinds ``(tag, type)`` and the child edges between them."""

    def __init__(self, p: Program):
        self.program = p
        self.shapes = {}
        for r in p.rules:
            self.shapes.setdefault((r.tag, r.type), []).append(r)
        self.kinds = set()
        for tag, pats in p.registry.items():
            for types in pats.values():
                for t in types:
                    self.kinds.add((tag, t))

    def rules(self, tag, types) -> list:
        out = []
        for t in sorted(types):
            out += self.shapes.get((tag, t), [])
        return out

    def children(self, tag, type_) -> list:
        """Child kinds of ``(tag, type_)``, unlabeled text excluded."""
        out = []
        for r in self.shapes.get((tag, type_), []):
            for c in r.children:
                k = (c, r.child_type)
                if c != UNLABELED and k not in out:
                    out.append(k)
        return out

    def child_types(self, tag, types, child) -> set:
        out = set()
        for r in self.rules(tag, types):
            if child in r.children:
                out.add(r.child_type)
        return out

    def below(self, tag, type_) -> list:
        """Rules of ``(tag, type_)`` and of every kind underneath it."""
        out, todo, seen = [], [(tag, type_)], set()
        while todo:
            k = todo.pop()
            if k in seen:
                continue
            seen.add(k)
            for r in self.shapes.get(k, []):
                out.append(r)
                todo += [(c, r.child_type) for c in r.children]
        return out

    def safe(self, tag, types) -> bool:
        """Do equal-arity patterns of ``tag`` always mean the same slots?"""
        seen = {}
        for r in self.rules(tag, types):
            key = len(r.pattern.args)
            if seen.setdefault(key, (r.children, r.attributes)) != (r.children, r.attributes):
                return False
        return True


def tag_steps(q: XPathExpr) -> tuple:
    return q.steps[: q.last_tag_index + 1]


def path_types(q: XPathExpr, p: Program, schema: Optional[Schema] = None) -> list:
    """Type sets reachable by the tag steps of the core query ``q``."""
    schema = schema or Schema(p)
    steps = tag_steps(q)
    out = []
    current = {1} if steps and steps[0].name == p.root_tag else set()
    out.append(current)
    for prev, step in zip(steps, steps[1:]):
        current = schema.child_types(prev.name, current, step.name)
        out.append(current)
    return out


# ---------------------------------------------------------------------------
# FE and expansion


def fe(q: XPathExpr) -> XPathExpr:
    """``q`` with every equality replaced by an existence test."""
    return XPathExpr(tuple(_fe_step(s) for s in q.steps))


def _fe_step(s):
    if isinstance(s, TagCond):
        return TagCond(s.name, _fe_cond(s.cond))
    return s


def _fe_cond(c):
    if isinstance(c, TagEq):
        return Path(XPathExpr((Tag(c.tag),)))
    if isinstance(c, AttrEq):
        return Path(XPathExpr((Attr(c.att),)))
    if isinstance(c, Path):
        return Path(fe(c.expr))
    return type(c)(_fe_cond(c.left), _fe_cond(c.right))


def expand(q: XPathExpr, p: Program, schema: Optional[Schema] = None) -> list:
    """Core queries equivalent to ``q`` on documents with ``p``'s schema."""
    schema = schema or Schema(p)
    steps = tag_steps(q)
    leaf = q.steps[len(steps):]
    found = []

    def root_kinds():
        return [k for k in schema.kinds if k == (p.root_tag, 1)]

    def walk(i, kinds, acc):
        if i == len(steps):
            found.append(tuple(acc))
            return
        step = steps[i]
        if isinstance(step, (Tag, TagCond)):
            nxt = [k for k in kinds if k[0] == step.name]
            if nxt:
                walk(i + 1, _children_of(nxt), acc + [step])
        elif isinstance(step, Wildcard):
            for tag in _tags(kinds):
                walk(i + 1, _children_of([k for k in kinds if k[0] == tag]),
                     acc + [Tag(tag)])
        else:
            _descend(i, step.name, kinds, acc)

    def _descend(i, name, kinds, acc):
        here = [k for k in kinds if k[0] == name]
        if here:
            walk(i + 1, _children_of(here), acc + [Tag(name)])
        for tag in _tags(kinds):
            sub = _children_of([k for k in kinds if k[0] == tag])
            if sub:
                _descend(i, name, sub, acc + [Tag(tag)])

    def _children_of(kinds):
        out = []
        for tag, t in kinds:
            for k in schema.children(tag, t):
                if k not in out:
                    out.append(k)
        return out

    def _tags(kinds):
        out = []
        for tag, _ in kinds:
            if tag not in out:
                out.append(tag)
        return out

    walk(0, root_kinds(), [])
    out, seen = [], set()
    for acc in found:
        e = XPathExpr(acc + tuple(leaf))
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


# ---------------------------------------------------------------------------
# condition literals


@dataclass(frozen=True)
class Lit:
    """One test of a condition, attached to the tag step it belongs to."""

    step: int
    kind: str                 # 'tag' | 'attr' | 'path'
    name: str                 # child tag or attribute name
    value: Optional[str] = None
    expr: Optional[XPathExpr] = None

    @property
    def attribute(self) -> bool:
        return self.kind == "attr"

    @property
    def slot(self) -> tuple:
        return (self.name, self.attribute)


def dnf(cond, step: int = 0) -> list:
    """Disjunctive normal form as a list of literal tuples, textual order kept."""
    if isinstance(cond, TagEq):
        return [(Lit(step, "tag", cond.tag, cond.value),)]
    if isinstance(cond, AttrEq):
        return [(Lit(step, "attr", cond.att, cond.value),)]
    if isinstance(cond, Path):
        first = cond.expr.steps[0]
        if isinstance(first, Attr):
            return [(Lit(step, "attr", first.name),)]
        return [(Lit(step, "path", first.name, expr=cond.expr),)]
    if isinstance(cond, Or):
        return dnf(cond.left, step) + dnf(cond.right, step)
    return [a + b for a in dnf(cond.left, step) for b in dnf(cond.right, step)]


def literals(cond, step: int = 0) -> list:
    """Distinct literals of ``cond`` in order of first appearance."""
    out = []
    for conj in dnf(cond, step):
        for lit in conj:
            if lit not in out:
                out.append(lit)
    return out


def query_dnf(q: XPathExpr) -> list:
    """DNF of the conjunction of all step conditions of ``q``."""
    out = [()]
    for i, s in enumerate(tag_steps(q)):
        if isinstance(s, TagCond):
            out = [a + b for a in out for b in dnf(s.cond, i)]
    return out


def admits(r: Rule, lits) -> bool:
    return all((lit.name in r.attributes) if lit.attribute else (lit.name in r.children)
               for lit in lits)


def _possible(r: Rule, cond) -> bool:
    return any(admits(r, conj) for conj in dnf(cond))


def leaf_slot(q: XPathExpr):
    leaf = q.leaf
    if isinstance(leaf, Attr):
        return (leaf.name, True)
    if isinstance(leaf, Text):
        return (UNLABELED, False)
    return None


def next_slot(q: XPathExpr, i: int):
    """Slot a rule at tag step ``i`` must have for the query to continue."""
    steps = tag_steps(q)
    if i + 1 < len(steps):
        return (steps[i + 1].name, False)
    return leaf_slot(q)


def has_slot(r: Rule, slot) -> bool:
    if slot is None:
        return True
    name, attribute = slot
    return name in (r.attributes if attribute else r.children)


# ---------------------------------------------------------------------------
# specialization and reordering


def _atom_slot(r: Rule, a: Atom):
    return (a.pred, r.is_attribute_atom(a))


def specialize_rules(p: Program, q: XPathExpr, schema: Optional[Schema] = None) -> list:
    """Rules of ``p`` restricted to what the core query ``q`` can reach.

    Rules on the path keep the atom leading to the next step plus the atoms
    named by the step's condition; rules of the last step (and below it) are
    kept whole. Attribute atoms no condition mentions are dropped.
    """
    schema = schema or Schema(p)
    steps = tag_steps(q)
    types = path_types(q, p, schema)
    if any(not t for t in types):
        raise EmptySpecialization(f"{to_text(fe(q))} matches no path of the schema")
    kept = {}
    k = len(steps) - 1
    for i, step in enumerate(steps):
        cond = step.cond if isinstance(step, TagCond) else None
        lits = literals(cond, i) if cond is not None else []
        for r in schema.rules(step.name, types[i]):
            if cond is not None and not _possible(r, cond):
                continue
            nxt = next_slot(q, i)
            if not has_slot(r, nxt):
                continue
            if i == k and q.leaf is None:
                for w in schema.below(r.tag, r.type):
                    kept.setdefault(id(w), w)
                continue
            want = {lit.slot for lit in lits}
            if nxt is not None:
                want.add(nxt)
            body = [a for a in r.body if _atom_slot(r, a) in want]
            kept[id(r)] = r.with_body(body)
            for lit in lits:
                if lit.kind == "path" and lit.name in r.children:
                    for w in schema.below(lit.name, r.child_type):
                        kept.setdefault(id(w), w)
    if not kept and not _terminal_last(schema, steps, types):
        raise EmptySpecialization(f"{to_text(fe(q))} matches no path of the schema")
    order = {id(r): n for n, r in enumerate(p.rules)}
    return [r for _, r in sorted(kept.items(), key=lambda kv: order[kv[0]])]


def _terminal_last(schema, steps, types):
    return any((steps[-1].name, t) in schema.kinds for t in types[-1])


def reorder(rules, q: XPathExpr, p: Program, schema: Optional[Schema] = None) -> list:
    """Put each conditioned rule's condition atoms first, in query order."""
    schema = schema or Schema(p)
    steps = tag_steps(q)
    types = path_types(q, p, schema)
    out = []
    for r in rules:
        lits = []
        for i, s in enumerate(steps):
            if isinstance(s, TagCond) and s.name == r.tag and r.type in types[i]:
                lits = literals(s.cond, i)
                break
        if not lits:
            out.append(r)
            continue
        rank = {}
        for n, lit in enumerate(lits):
            rank.setdefault(lit.slot, n)
        front = sorted((a for a in r.body if _atom_slot(r, a) in rank),
                       key=lambda a: rank[_atom_slot(r, a)])
        back = [a for a in r.body if _atom_slot(r, a) not in rank]
        out.append(r.with_body(front + back))
    return out


# ---------------------------------------------------------------------------
# query patterns and goals


@dataclass(frozen=True)
class Goal:
    atom: Atom
    step: int                      # tag step the goal is posed on
    conjunct: tuple = ()           # literals of all steps, textual order
    shape: Optional[Rule] = None   # rule the pattern instantiates

    def __str__(self):
        return str(self.atom)


def _bind_pattern(r: Rule, lits):
    """Substitution giving the first value literal of each slot its constant."""
    s, used = {}, set()
    for lit in lits:
        if lit.slot in used:
            continue
        used.add(lit.slot)
        if lit.value is not None:
            s[r.slot_of(lit.name, lit.attribute)] = Const(lit.value)
    return s, used


def _nested(q, p, schema, types, j, ctype, conjunct, taken):
    """Instances of step ``j``'s patterns carrying the constants of later steps."""
    steps = tag_steps(q)
    here = [lit for lit in conjunct if lit.step == j]
    later = any(lit.step > j for lit in conjunct)
    if not here and not later:
        return [None]
    if not schema.safe(steps[j].name, types[j]):
        return [None]
    out = []
    for r in schema.shapes.get((steps[j].name, ctype), []):
        if not admits(r, here) or not has_slot(r, next_slot(q, j)):
            continue
        s, used = _bind_pattern(r, here)
        subs = [None]
        if j + 1 < len(steps) and (steps[j + 1].name, False) not in used:
            subs = _nested(q, p, schema, types, j + 1, r.child_type, conjunct, taken)
        for sub in subs:
            s2 = dict(s)
            if sub is not None:
                s2[r.slot_of(steps[j + 1].name)] = sub
            pat = apply(s2, r.pattern)
            out.append(_apart(pat, taken))
    return out


def _apart(t, taken):
    """Rename variables of ``t`` that clash with names already in use."""
    memo = {}
    for v in variables(t):
        name = v.name
        while name in taken:
            name += "1"
        taken.add(name)
        if name != v.name:
            memo[v] = Var(name)
    return apply(memo, t)


def goals(q: XPathExpr, p: Program, schema: Optional[Schema] = None) -> list:
    """Goals for the core query ``q``.

    Without conditions there is one goal per type of the last tag step, with
    a variable pattern. Otherwise goals sit on the leftmost conditioned step:
    one per DNF conjunct and admissible rule shape, the pattern carrying the
    conjunct's constants (nested into the slots of later steps where the
    patterns are unambiguous).
    """
    schema = schema or Schema(p)
    steps = tag_steps(q)
    types = path_types(q, p, schema)
    if any(not t for t in types):
        return []
    node = Var("Node")
    conds = [i for i, s in enumerate(steps) if isinstance(s, TagCond)]
    if not conds:
        k = len(steps) - 1
        name = steps[k].name
        return [Goal(Atom(name, Var(var_name(name)), node, t), k) for t in sorted(types[k])]
    i1 = conds[0]
    out, seen = [], set()
    for conj in query_dnf(q):
        here = [lit for lit in conj if lit.step == i1]
        for r in schema.rules(steps[i1].name, types[i1]):
            if not admits(r, here) or not has_slot(r, next_slot(q, i1)):
                continue
            s, used = _bind_pattern(r, here)
            subs = [None]
            if i1 + 1 < len(steps) and (steps[i1 + 1].name, False) not in used:
                taken = {v.name for v in variables(r.pattern)} | {"Node"}
                subs = _nested(q, p, schema, types, i1 + 1, r.child_type, conj, taken)
            for sub in subs:
                s2 = dict(s)
                if sub is not None:
                    s2[r.slot_of(steps[i1 + 1].name)] = sub
                g = Goal(Atom(r.tag, apply(s2, r.pattern), node, r.type), i1, conj, r)
                key = (str(g), conj, id(r))
                if key not in seen:
                    seen.add(key)
                    out.append(g)
    return out


def pt_query(q: XPathExpr, p: Program) -> list:
    """Distinct goal patterns of ``q`` in generation order."""
    out = []
    for g in goals(q, p):
        if g.atom.value not in out:
            out.append(g.atom.value)
    return out


def explain(q: XPathExpr, p: Program) -> str:
    """Readable dump of every transformation applied to ``q``."""
    schema = Schema(p)
    lines = [f"query: {to_text(q)}", f"fe: {to_text(fe(q))}"]
    cores = expand(q, p, schema)
    if not cores:
        lines.append("expansions: none (no schema path matches)")
        return "\n".join(lines) + "\n"
    for c in cores:
        lines.append(f"expansion: {to_text(c)}")
        lines.append("  path types: " + " / ".join(
            "{" + ",".join(str(t) for t in sorted(ts)) + "}"
            for ts in path_types(c, p, schema)))
        try:
            spec = specialize_rules(p, c, schema)
        except EmptySpecialization as exc:
            lines.append(f"  empty specialization: {exc}")
            continue
        lines.append("  specialized rules:")
        lines += [f"    {r}" for r in spec]
        lines.append("  reordered rules:")
        lines += [f"    {r}" for r in reorder(spec, c, p, schema)]
        lines.append("  goals:")
        lines += [f"    {g}" for g in goals(c, p, schema)]
    return "\n".join(lines) + "\n"
