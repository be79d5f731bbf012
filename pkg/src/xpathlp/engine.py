"""Top-down evaluation of queries against a fact store.

For every core query (after ``//``/``*`` expansion) and every goal the
engine compiles a small clause program from the schema rules:

* the rule of the goal's step keeps its condition atoms (reordered first)
  and the atom leading to the next step;
* rules of later steps keep their own condition atoms, with the constants
  written into the atoms, and the next-step atom;
* rules of the last step, and everything below it, are kept whole;
* a condition that is itself a path gets its own chain of clauses.

SLD resolution then runs depth-first, rules before facts, facts fetched
through the store's index. Every proof records the facts it used, the node
of each matched element (``final``) and of each element proving a path
condition (``witness``). Witnesses are then fetched whole, the attributes
of every element on a selected branch are fetched, and the answer document
is rebuilt from the collected facts.

Without specialization the same goals run against the rules with all their
original atoms, in their original order; atoms the query does not need are
proved but their facts are not collected.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .errors import EngineInvariantViolation
from .fact_store import Evaluation, FactStore, MemoryFactStore
from .specializer import (Goal, Schema, admits, dnf, expand, goals, has_slot, next_slot,
                          path_types, tag_steps)
from .terms import (Const, Seq, Term, Var, format_term, rename, resolve, undo,
                    unify_into, variables)
from .translator import Atom, Program, Rule, rebuild_doc
from .xml_model import UNLABELED, Element, Text, XmlTree, serialize, strip_numbers
from .xpath import Attr, TagCond, XPathExpr
from .xpath import Text as TextStep


@dataclass(frozen=True)
class Call:
    """A body atom plus how it may be resolved."""

    atom: Atom
    ctx: Optional[str]          # clause set for rule resolution; None: facts only
    facts: bool = True          # may unify with stored facts
    attribute: bool = False     # attribute atom (the node is the owner's)
    collect: bool = True        # record the facts used below this call
    mark: Optional[str] = None  # 'final' | 'witness'
    nonempty: bool = False      # skip facts whose value is ''


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple

    def __str__(self):
        body = ", ".join(str(c.atom) for c in self.body)
        return f"{self.head} :- {body}." if body else f"{self.head}."


def _rename_atom(a: Atom, memo, suffix) -> Atom:
    return Atom(a.pred, rename(a.value, suffix, memo), rename(a.node, suffix, memo), a.type)


# ---------------------------------------------------------------------------
# solver


@dataclass
class Answer:
    """One successful derivation of a goal."""

    bindings: dict             # goal variable name -> resolved term
    instance: Atom
    facts: tuple               # (store position, fact) pairs
    marks: tuple               # (kind, node tuple in document order, pred, type)

    def bindings_text(self) -> str:
        return ", ".join(f"{k}/{format_term(v)}" for k, v in self.bindings.items()
                         if not variables(v))


def _show(t: Term, s) -> str:
    """Resolved term with unbound variables printed as ``_``."""
    r = resolve(t, s)
    memo = {v: Var("_") for v in variables(r)}
    return format_term(_subst(r, memo))


def _subst(t, memo):
    if isinstance(t, Var):
        return memo.get(t, t)
    if isinstance(t, Seq):
        return Seq(tuple(_subst(i, memo) for i in t.items),
                   None if t.tail is None else _subst(t.tail, memo))
    if hasattr(t, "args"):
        return type(t)(t.functor, tuple(_subst(a, memo) for a in t.args))
    return t


def _doc_node(t: Term) -> tuple:
    return tuple(reversed([c.value for c in t.items]))


class Solver:
    """Depth-first SLD resolution over compiled clauses and a fact store."""

    def __init__(self, clauses: dict, ev: Evaluation, max_depth: int, occurs_check=True):
        self.clauses = clauses
        self.ev = ev
        self.max_depth = max_depth
        self.occurs_check = occurs_check
        self.trace = ev.trace
        self._fresh = itertools.count(1)

    def solve(self, call: Call):
        s, trail = {}, []
        goal_vars = variables(call.atom.value) + variables(call.atom.node)
        for facts, marks in self._run(((call, 0, call.collect, True), None), s, trail, None, None):
            bindings = {v.name: resolve(v, s) for v in goal_vars}
            inst = Atom(call.atom.pred, resolve(call.atom.value, s),
                        resolve(call.atom.node, s), call.atom.type)
            fs, node = [], facts
            while node is not None:
                fs.append(node[0])
                node = node[1]
            ms, node = [], marks
            while node is not None:
                kind, term, pred, type_ = node[0]
                ms.append((kind, _doc_node(resolve(term, s)), pred, type_))
                node = node[1]
            yield Answer(bindings, inst, tuple(reversed(fs)), tuple(reversed(ms)))

    def _log(self, line):
        if self.trace is not None:
            self.trace.append(line)

    def _run(self, goals, s, trail, facts, marks):
        if goals is None:
            yield facts, marks
            return
        item, rest = goals
        if item[0] == "exit":
            if self.trace is not None:
                self._log(f"success {_show(item[1].term(), s)}")
            yield from self._run(rest, s, trail, facts, marks)
            return
        call, depth, collect, outer = item
        atom = call.atom
        if self.trace is not None:
            self._log(f"call {_show(atom.term(), s)}")
        if outer and call.mark is not None:
            marks = ((call.mark, atom.node, atom.pred, atom.type), marks)
        if call.ctx is not None:
            for clause in self.clauses.get((call.ctx, atom.pred, atom.type), ()):
                if depth + 1 > self.max_depth:
                    raise EngineInvariantViolation(
                        f"resolution depth {depth + 1} exceeds {self.max_depth}")
                suffix = f"_{next(self._fresh)}"
                memo = {}
                head = _rename_atom(clause.head, memo, suffix)
                mark = len(trail)
                if unify_into(head.term(), atom.term(), s, self.occurs_check, trail) is None:
                    undo(s, trail, mark)
                    continue
                body = (("exit", head), rest)
                for c in reversed(clause.body):
                    c2 = Call(_rename_atom(c.atom, memo, suffix), c.ctx, c.facts,
                              c.attribute, c.collect, c.mark, c.nonempty)
                    body = ((c2, depth + 1, collect and c.collect, collect), body)
                yield from self._run(body, s, trail, facts, marks)
                undo(s, trail, mark)
        if not call.facts:
            return
        counters = self.ev.counters
        for acc in self.ev.retrieve(atom.pred, atom.node, call.attribute, s):
            fact = acc.fact
            mark = len(trail)
            ok = not (call.nonempty and fact.value == "")
            if ok:
                ok = unify_into(fact.atom.term(), atom.term(), s, self.occurs_check,
                                trail) is not None
            if not ok:
                undo(s, trail, mark)
                if self.trace is not None:
                    self._log(_access_line(acc, "fail"))
                continue
            counters.facts_touched += 1
            self.ev.touched.append(acc.pos)
            new = self.ev.cache.record(fact.group, acc.group_pos) if self.ev.use_cache else False
            if self.trace is not None:
                extra = f" [group {list(fact.group)} @{acc.group_pos}]" if new else ""
                self._log(_access_line(acc, "success") + extra)
            yield from self._run(rest, s, trail, (((acc.pos, fact), facts) if collect else facts),
                                 marks)
            undo(s, trail, mark)


def _access_line(acc, outcome):
    if acc.strategy == "index2":
        where = f"@{acc.at} #{acc.pos}"
    elif acc.strategy == "index1":
        where = f"@{acc.at}"
    else:
        where = f"#{acc.pos}"
    return f"{acc.strategy} {acc.fact.pred} {where}: {acc.fact} {outcome}"


# ---------------------------------------------------------------------------
# clause compilation


class _Compiler:
    def __init__(self, p: Program, schema: Schema, specialize: bool):
        self.p = p
        self.schema = schema
        self.specialize = specialize
        self.clauses = {}
        self._n = itertools.count(1)
        self._base_done = False

    def fresh(self, prefix="F"):
        return Var(f"_{prefix}{next(self._n)}")

    def add(self, ctx, clause: Clause):
        self.clauses.setdefault((ctx, clause.head.pred, clause.head.type), []).append(clause)

    def new_ctx(self, label):
        return f"{label}{next(self._n)}"

    # -- shared clause sets

    def base(self):
        """'whole', 'anchor' and 'attrs' clause sets, compiled once."""
        if self._base_done:
            return
        self._base_done = True
        for r in self.p.rules:
            whole = tuple(Call(a, "whole", attribute=r.is_attribute_atom(a)) for a in r.body)
            self.add("whole", Clause(r.head, whole))
            if self.specialize:
                first = r.body[0]
                anchor = (Call(first, "anchor", attribute=r.is_attribute_atom(first),
                               collect=False),)
            else:
                anchor = tuple(Call(a, "whole", attribute=r.is_attribute_atom(a), collect=False)
                               for a in r.body)
            self.add("anchor", Clause(r.head, anchor))
            if r.attributes:
                attrs = [Call(a, None, attribute=True) for a in r.body if r.is_attribute_atom(a)]
                self.add("attrs", Clause(r.head, self._arrange(r, attrs)))

    def _arrange(self, r: Rule, calls) -> tuple:
        """Specialized: ``calls`` as given. Otherwise fit them into ``r``'s body.

        Calls that reuse the atom of a slot take that atom's place; the other
        original atoms are proved without collecting; calls with a fresh value
        go last.
        """
        if self.specialize:
            return tuple(calls)
        out, placed = [], set()
        for a in r.body:
            attr = r.is_attribute_atom(a)
            match = None
            for i, c in enumerate(calls):
                if (i not in placed and c.atom.pred == a.pred and c.attribute == attr
                        and c.atom.value == a.value):
                    match = i
                    break
            if match is None:
                out.append(Call(a, "whole", attribute=attr, collect=False))
            else:
                placed.add(match)
                out.append(calls[match])
        out += [c for i, c in enumerate(calls) if i not in placed]
        return tuple(out)

    # -- condition literals

    def _cond_calls(self, r: Rule, lits, use_slots: bool):
        """Calls testing ``lits`` on an element of shape ``r``; also the slots used."""
        calls, first, used = [], set(), set()
        for lit in lits:
            slot_var = r.slot_of(lit.name, lit.attribute)
            is_first = lit.slot not in first
            first.add(lit.slot)
            used.add(lit.slot)
            node = r.head.node if lit.attribute else Seq((self.fresh("N"),), r.head.node)
            if use_slots and is_first:
                value = slot_var
            elif lit.value is not None:
                value = Const(lit.value)
            else:
                value = self.fresh()
            if lit.kind == "path":
                ctx, facts = self.path_ctx(lit.expr, r.child_type)
                calls.append(Call(Atom(lit.name, value, node, r.child_type), ctx, facts,
                                  collect=False, mark="witness"))
            else:
                calls.append(Call(Atom(lit.name, value, node, r.child_type), None,
                                  attribute=lit.attribute))
        return calls, used

    def path_ctx(self, expr: XPathExpr, ctype: int):
        """Compile the clauses proving a relative path; (ctx, facts allowed)."""
        steps = [s for s in expr.steps if not isinstance(s, Attr)]
        leaf = expr.steps[-1] if isinstance(expr.steps[-1], Attr) else None
        ctxs = [self.new_ctx("p") for _ in steps]
        types = [{ctype}]
        for m, step in enumerate(steps):
            nxt_types = set()
            last = m == len(steps) - 1
            for t in sorted(types[m]):
                for r in self.schema.shapes.get((step.name, t), []):
                    conjs = dnf(step.cond) if isinstance(step, TagCond) else [()]
                    for conj in conjs:
                        if not admits(r, conj):
                            continue
                        calls, used = self._cond_calls(r, conj, use_slots=False)
                        if not last:
                            nxt = steps[m + 1]
                            if nxt.name not in r.children:
                                continue
                            nxt_types.add(r.child_type)
                            open_end = (m + 1 == len(steps) - 1 and leaf is None
                                        and not isinstance(nxt, TagCond))
                            calls.append(Call(
                                Atom(nxt.name, self.fresh(),
                                     Seq((self.fresh("N"),), r.head.node), r.child_type),
                                ctxs[m + 1], facts=open_end, collect=False))
                        elif leaf is not None:
                            if leaf.name not in r.attributes:
                                continue
                            calls.append(Call(Atom(leaf.name, self.fresh(), r.head.node,
                                                   r.child_type), None, attribute=True,
                                              collect=False))
                        elif not calls:
                            first = r.body[0]
                            calls.append(Call(first, "anchor",
                                              attribute=r.is_attribute_atom(first),
                                              collect=False))
                        calls = [Call(c.atom, c.ctx, c.facts, c.attribute, False, None,
                                      c.nonempty) for c in calls]
                        self.add(ctxs[m], Clause(r.head, self._arrange(r, calls)))
            types.append(nxt_types)
        first = steps[0]
        facts = len(steps) == 1 and leaf is None and not isinstance(first, TagCond)
        return ctxs[0], facts

    # -- query steps

    def query(self, q: XPathExpr, goal: Goal, types) -> Call:
        """Compile the clauses for ``goal``; return the top call."""
        self.base()
        steps = tag_steps(q)
        k = len(steps) - 1
        leaf = q.leaf
        conj = goal.conjunct
        i1 = goal.step
        ctxs = {j: self.new_ctx(f"s{j}_") for j in range(i1, k + 1)}
        for j in range(i1 + 1, k + 1):
            for r in self.schema.rules(steps[j].name, types[j]):
                c = self.step_clause(q, r, j, conj, ctxs, use_slots=False)
                if c is not None:
                    self.add(ctxs[j], c)
        final_facts = (not isinstance(steps[k], TagCond)) and not isinstance(leaf, Attr)
        if goal.shape is None:
            for r in self.schema.rules(steps[k].name, types[k]):
                c = self.step_clause(q, r, k, conj, ctxs, use_slots=True)
                if c is not None:
                    self.add(ctxs[k], c)
            return Call(goal.atom, ctxs[k], facts=final_facts, mark="final",
                        nonempty=isinstance(leaf, TextStep))
        top = self.new_ctx("g")
        c = self.step_clause(q, goal.shape, i1, conj, ctxs, use_slots=True)
        if c is not None:
            self.add(top, c)
        return Call(goal.atom, top, facts=False, mark="final" if i1 == k else None)

    def step_clause(self, q, r: Rule, j, conj, ctxs, use_slots) -> Optional[Clause]:
        steps = tag_steps(q)
        k = len(steps) - 1
        lits = [lit for lit in conj if lit.step == j]
        if not admits(r, lits) or not has_slot(r, next_slot(q, j)):
            return None
        calls, used = self._cond_calls(r, lits, use_slots)
        ct = r.child_type

        def slot_value(name, attribute=False):
            if (name, attribute) in used:
                return self.fresh()
            return r.slot_of(name, attribute)

        if j < k:
            nxt = steps[j + 1]
            final = j + 1 == k
            facts = final and not isinstance(nxt, TagCond) and not isinstance(q.leaf, Attr)
            calls.append(Call(Atom(nxt.name, slot_value(nxt.name),
                                   Seq((self.fresh("N"),), r.head.node), ct),
                              ctxs[j + 1], facts=facts, mark="final" if final else None,
                              nonempty=final and isinstance(q.leaf, TextStep)))
        elif isinstance(q.leaf, Attr):
            a = q.leaf.name
            calls.append(Call(Atom(a, slot_value(a, True), r.head.node, ct), None,
                              attribute=True))
        elif isinstance(q.leaf, TextStep):
            calls.append(Call(Atom(UNLABELED, slot_value(UNLABELED),
                                   Seq((self.fresh("N"),), r.head.node), ct), None))
        else:
            for a in r.body:
                attr = r.is_attribute_atom(a)
                value = slot_value(a.pred, attr)
                calls.append(Call(Atom(a.pred, value, a.node, a.type), "whole", attribute=attr))
        return Clause(r.head, self._arrange(r, calls))


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class QueryResult:
    query: XPathExpr
    cores: list
    goals: list                      # (core query, Goal) pairs
    answers: list                    # (Goal, [Answer]) pairs
    finals: list                     # document-order node tuples
    facts: list                      # collected facts, store order
    answer_doc: Optional[XmlTree]    # numbered
    forest: list
    counters: object
    trace: Optional[list] = None
    touched: list = field(default_factory=list)   # store positions of unified facts

    def result_xml(self) -> str:
        return result_xml(self.forest)

    def answers_text(self) -> str:
        lines = []
        for goal, answers in self.answers:
            lines.append(f"goal {goal}")
            for a in answers:
                lines.append(f"  {a.bindings_text()}")
        return "\n".join(lines) + ("\n" if lines else "")


def result_xml(forest) -> str:
    if not forest:
        return "<result/>"
    return "<result>" + "".join(serialize(x) for x in forest) + "</result>"


def evaluate(store: FactStore, q: XPathExpr, specialize=True, use_index=True,
             trace=False, occurs_check=True, use_cache=True) -> QueryResult:
    """Evaluate ``q`` on ``store``; see the module docstring."""
    p = store.program
    schema = Schema(p)
    ev = store.evaluation(use_index=use_index, trace=[] if trace else None,
                          use_cache=use_cache)
    comp = _Compiler(p, schema, specialize)
    solver = Solver(comp.clauses, ev, p.max_type + 1, occurs_check)
    cores = expand(q, p, schema)
    finals, witnesses, facts = {}, {}, {}
    all_goals, all_answers = [], []
    for core in cores:
        types = path_types(core, p, schema)
        for g in goals(core, p, schema):
            all_goals.append((core, g))
            top = comp.query(core, g, types)
            answers = list(solver.solve(top))
            all_answers.append((g, answers))
            for a in answers:
                _absorb(a, finals, witnesses, facts)
    for node, (pred, type_) in sorted(witnesses.items()):
        call = Call(Atom(pred, Var("W"), _rev_seq(node), type_), "whole")
        for a in solver.solve(call):
            _absorb(a, {}, {}, facts)
    leaf = q.leaf
    branch = {}
    for node, (pred, type_) in finals.items():
        if leaf is not None:
            branch[node] = (pred, type_)
        _ancestors(p, node, type_, branch)
    comp.base()
    for node, (pred, type_) in sorted(branch.items()):
        if not any(r.attributes for r in schema.shapes.get((pred, type_), [])):
            continue
        call = Call(Atom(pred, Var("A"), _rev_seq(node), type_), "attrs", facts=False)
        for a in solver.solve(call):
            _absorb(a, {}, {}, facts)
    ordered = [f for _, f in sorted(facts.items())]
    doc = rebuild_doc(p.rules, ordered) if ordered else None
    final_nodes = sorted(finals)
    forest = _forest(doc, final_nodes, leaf)
    return QueryResult(q, cores, all_goals, all_answers, final_nodes, ordered, doc, forest,
                       ev.counters, ev.trace, ev.touched)


def _rev_seq(node: tuple) -> Seq:
    return Seq(tuple(Const(i) for i in reversed(node)))


def _absorb(a: Answer, finals, witnesses, facts):
    for pos, f in a.facts:
        facts[pos] = f
    for kind, node, pred, type_ in a.marks:
        (finals if kind == "final" else witnesses)[node] = (pred, type_)


def _ancestors(p: Program, node, type_, out):
    while type_ != 1:
        r = p.by_child_type[type_]
        node = node[:-1]
        out[node] = (r.tag, r.type)
        type_ = r.type


def _index(doc: Optional[XmlTree]) -> dict:
    out = {}
    if doc is None:
        return out
    todo = [doc.root]
    while todo:
        e = todo.pop()
        out[e.node] = e
        todo += [c for c in e.children if isinstance(c, Element)]
    return out


def _forest(doc, nodes, leaf) -> list:
    by_node = _index(doc)
    out = []
    for n in nodes:
        e = by_node[n]
        if isinstance(leaf, Attr):
            v = e.attr(leaf.name)
            out.append(Element(leaf.name, [], [Text(v)] if v else []))
        elif isinstance(leaf, TextStep):
            for c in e.children:
                if isinstance(c, Text) and c.value != "":
                    out.append(Text(c.value))
                elif isinstance(c, Element) and c.tag == UNLABELED:
                    out.append(Text(c.text))
        else:
            out.append(strip_numbers(XmlTree(e)).root)
    return out


# ---------------------------------------------------------------------------
# convenience entry points


def solve(goal: Atom, rules, store: FactStore, trace=None, occurs_check=True):
    """Answers of ``goal`` against the full ``rules`` and ``store``'s facts."""
    p = store.program
    clauses = {}
    for r in rules:
        body = tuple(Call(a, "whole", attribute=r.is_attribute_atom(a)) for a in r.body)
        clauses.setdefault(("whole", r.tag, r.type), []).append(Clause(r.head, body))
    ev = store.evaluation(trace=trace)
    solver = Solver(clauses, ev, p.max_type + 1, occurs_check)
    return list(solver.solve(Call(goal, "whole")))


def answer_doc(store: FactStore, q: XPathExpr, **kw) -> Optional[XmlTree]:
    return evaluate(store, q, **kw).answer_doc


def result_forest(store: FactStore, q: XPathExpr, **kw) -> list:
    return evaluate(store, q, **kw).forest


def query_program(p: Program, q: XPathExpr, **kw) -> QueryResult:
    return evaluate(MemoryFactStore(p), q, **kw)
