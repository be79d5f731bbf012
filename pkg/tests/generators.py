"""Hypothesis strategies for documents and core queries."""

from __future__ import annotations

from hypothesis import strategies as st

from xpathlp.xml_model import Element, Text, XmlTree
from xpathlp.xpath import (And, Attr, AttrEq, Or, Path, Tag, TagCond, TagEq, XPathExpr)
from xpathlp.xpath import Text as TextStep

TAGS = ("a", "b", "c", "d")
ATTRS = ("x", "y", "c")          # "c" doubles as a tag name on purpose
VALUES = ("u", "v", "w w", "")


@st.composite
def elements(draw, depth=4, budget=None):
    budget = budget if budget is not None else [50]
    budget[0] -= 1
    tag = draw(st.sampled_from(TAGS))
    names = draw(st.lists(st.sampled_from(ATTRS), max_size=2, unique=True))
    attrs = [(n, draw(st.sampled_from(VALUES))) for n in names]
    if depth <= 1 or budget[0] <= 0 or draw(st.integers(0, 3)) == 0:
        value = draw(st.sampled_from(VALUES))
        return Element(tag, attrs, [Text(value)] if value else [])
    kids = []
    for _ in range(draw(st.integers(1, 4))):
        if budget[0] <= 0:
            break
        if draw(st.integers(0, 4)) == 0 and (not kids or not isinstance(kids[-1], Text)):
            kids.append(Text(draw(st.sampled_from(("t", "s s", "r")))))
        else:
            kids.append(draw(elements(depth - 1, budget)))
    if not any(isinstance(k, Element) for k in kids):
        kids.append(draw(elements(depth - 1, budget)))
    return Element(tag, attrs, kids)


@st.composite
def documents(draw, depth=4, size=50):
    return XmlTree(draw(elements(depth, [size])))


def _pick(draw, items):
    return items[draw(st.integers(0, len(items) - 1))]


@st.composite
def _condition(draw, e: Element, nested=True):
    kids = e.elements()
    options = ["tag", "attr", "path"] if kids else ["attr"]
    kind = draw(st.sampled_from(options))
    if kind == "attr":
        if e.attrs and draw(st.booleans()):
            name, value = _pick(draw, e.attrs)
        else:
            name, value = draw(st.sampled_from(ATTRS)), draw(st.sampled_from(VALUES))
        if draw(st.booleans()):
            return Path(XPathExpr((Attr(name),)))
        return AttrEq(name, value)
    c = _pick(draw, kids)
    if kind == "tag":
        value = c.text if c.is_terminal and draw(st.booleans()) else draw(st.sampled_from(VALUES))
        return TagEq(c.tag, value)
    steps = [Tag(c.tag)]
    gkids = c.elements()
    if nested and gkids and draw(st.booleans()):
        g = _pick(draw, gkids)
        if draw(st.booleans()):
            steps[0] = TagCond(c.tag, draw(_condition(c, nested=False)))
        steps.append(Tag(g.tag))
    if draw(st.integers(0, 3)) == 0:
        holder = c if len(steps) == 1 else g
        name = _pick(draw, holder.attrs)[0] if holder.attrs else draw(st.sampled_from(ATTRS))
        steps.append(Attr(name))
    return Path(XPathExpr(tuple(steps)))


@st.composite
def core_queries(draw, doc: XmlTree, max_steps=3, max_conds=2):
    """A core query shaped by a random root-to-element walk of ``doc``."""
    e = doc.root
    path = [e]
    for _ in range(draw(st.integers(0, max_steps - 1))):
        kids = e.elements()
        if not kids:
            break
        e = _pick(draw, kids)
        path.append(e)
    steps = [Tag(x.tag) for x in path]
    if draw(st.integers(0, 5)) == 0:
        steps[-1] = Tag(draw(st.sampled_from(TAGS)))
    conds = draw(st.integers(0, max_conds))
    for _ in range(conds):
        i = draw(st.integers(0, len(path) - 1))
        c = draw(_condition(path[i]))
        old = steps[i]
        if isinstance(old, TagCond):
            c = (And if draw(st.booleans()) else Or)(old.cond, c)
        steps[i] = TagCond(old.name, c)
    leaf = draw(st.integers(0, 5))
    if leaf == 0:
        name = _pick(draw, e.attrs)[0] if e.attrs else draw(st.sampled_from(ATTRS))
        steps.append(Attr(name))
    elif leaf == 1:
        steps.append(TextStep())
    return XPathExpr(tuple(steps))


@st.composite
def doc_and_query(draw, depth=4, size=50):
    doc = draw(documents(depth, size))
    return doc, draw(core_queries(doc))
