"""Reference semantics: direct evaluation of a query on a plain XML tree.

``subtree(X, q)`` is the sub-document a query selects: the branches from the
root down to every matched element, keeping the attributes of each element
on a branch, the siblings that witness a condition (whole), and the matched
elements themselves (whole). An element on a branch is kept only if some
match lies below it. ``extract_answer`` reads the matched items back out.

The oracle knows nothing about schemas or logic programs; it is the
independent half of the differential tests.
"""

from __future__ import annotations

from typing import Optional

from .xml_model import Element, Text, XmlTree
from .xpath import (And, Attr, AttrEq, DescendantTag, Or, Path, Tag, TagCond,
                    TagEq, Wildcard, XPathExpr)
from .xpath import Text as TextStep


def _tag_matches(step, e: Element) -> bool:
    if isinstance(step, Wildcard):
        return True
    return e.tag == step.name


def _texts(e: Element) -> list:
    return [c for c in e.children if isinstance(c, Text) and c.value != ""]


def satisfies(e: Element, step) -> bool:
    """Does element ``e`` match the (tag) step, condition included?"""
    if not _tag_matches(step, e):
        return False
    return not isinstance(step, TagCond) or holds(e, step.cond)


def holds(e: Element, cond) -> bool:
    if isinstance(cond, TagEq):
        return any(c.tag == cond.tag and c.is_terminal and c.text == cond.value
                   for c in e.elements())
    if isinstance(cond, AttrEq):
        return e.attr(cond.att) == cond.value
    if isinstance(cond, And):
        return holds(e, cond.left) and holds(e, cond.right)
    if isinstance(cond, Or):
        return holds(e, cond.left) or holds(e, cond.right)
    if isinstance(cond, Path):
        return bool(_path_witnesses(e, cond.expr)) or _own_attr_path(e, cond.expr)
    raise TypeError(f"unknown condition {cond!r}")


def _own_attr_path(e, expr: XPathExpr) -> bool:
    steps = expr.steps
    return len(steps) == 1 and isinstance(steps[0], Attr) and e.attr(steps[0].name) is not None


def _path_witnesses(e, expr: XPathExpr) -> list:
    if isinstance(expr.steps[0], Attr):
        return []
    return [c for c in e.elements() if _sub(c, expr.steps) is not None]


def witnesses(e: Element, cond) -> list:
    """Children of ``e`` that make ``cond`` true (attributes excluded)."""
    if isinstance(cond, TagEq):
        return [c for c in e.elements()
                if c.tag == cond.tag and c.is_terminal and c.text == cond.value]
    if isinstance(cond, AttrEq):
        return []
    if isinstance(cond, Path):
        return _path_witnesses(e, cond.expr)
    if isinstance(cond, And):
        return witnesses(e, cond.left) + witnesses(e, cond.right)
    out = []
    for side in (cond.left, cond.right):
        if holds(e, side):
            out += witnesses(e, side)
    return out


def _shell(e: Element, children) -> Element:
    return Element(e.tag, list(e.attrs), list(children))


def _merge(a: Optional[Element], b: Optional[Element], src: Element) -> Optional[Element]:
    """Union of two partial copies of the same source element."""
    if a is None:
        return b
    if b is None:
        return a
    return _shell(src, _merge_children(src, [a.children, b.children]))


def _merge_children(src: Element, lists) -> list:
    """Merge partial children lists of ``src`` back into document order.

    Copies are matched to their source child by identity, so lists may come
    in any order and may repeat a child.
    """
    index = {id(c): i for i, c in enumerate(src.children)}
    picked = {}
    for kids in lists:
        for copy in kids:
            i = index[id(copy._src)]
            prev = picked.get(i)
            if prev is None:
                picked[i] = copy
            elif isinstance(copy, Element):
                picked[i] = _tagged(_merge(prev, copy, src.children[i]), src.children[i])
    return [picked[i] for i in sorted(picked)]


def _tagged(copy, src):
    if copy is not None:
        copy._src = src
    return copy


def _sub(x, steps) -> Optional[object]:
    """Partial copy of ``x`` selected by ``steps`` (None when empty)."""
    if isinstance(x, Text):
        return None
    step, rest = steps[0], steps[1:]
    if isinstance(step, DescendantTag):
        here = _sub(x, (Tag(step.name),) + rest)
        kids = [_tagged(_sub(c, steps), c) for c in x.elements()]
        kids = [k for k in kids if k is not None]
        below = _tagged(_shell(x, kids), x) if kids else None
        return _tagged(_merge(here, below, x), x)
    if isinstance(step, (Attr, TextStep)):
        raise ValueError("attribute and text() steps select from the previous step")
    if not satisfies(x, step):
        return None
    if not rest:
        return _tagged(_copy(x), x)
    if isinstance(rest[0], Attr):
        if x.attr(rest[0].name) is None:
            return None
        kids = []
    elif isinstance(rest[0], TextStep):
        kids = [_copy(t) for t in _texts(x)]
        if not kids:
            return None
    else:
        kids = []
        for c in x.elements():
            k = _sub(c, rest)
            if k is not None:
                kids.append(_tagged(k, c))
        if not kids:
            return None
    if isinstance(step, TagCond):
        extra = [_tagged(_copy(w), w) for w in witnesses(x, step.cond)]
        merged = _merge_children(x, [kids, extra])
    else:
        merged = kids
    return _tagged(_shell(x, merged), x)


def _copy(e):
    if isinstance(e, Text):
        return _tagged(Text(e.value), e)
    return Element(e.tag, list(e.attrs), [_tagged(_copy(c), c) for c in e.children])


def subtree(doc: XmlTree, q: XPathExpr) -> Optional[XmlTree]:
    """The sub-document of ``doc`` selected by ``q``, or None."""
    r = _sub(doc.root, q.steps)
    return None if r is None else XmlTree(_clean(r))


def _clean(e):
    if isinstance(e, Text):
        return Text(e.value)
    return Element(e.tag, list(e.attrs), [_clean(c) for c in e.children])


# ---------------------------------------------------------------------------
# answer extraction


def matched(doc: XmlTree, q: XPathExpr) -> list:
    """Elements matched by the last tag step of ``q``, in document order."""
    order = {id(e): i for i, e in enumerate(_preorder(doc.root))}
    found = {}
    _collect(doc.root, q.steps, found)
    return sorted(found.values(), key=lambda e: order[id(e)])


def _preorder(e):
    yield e
    for c in e.elements():
        yield from _preorder(c)


def _collect(x, steps, found):
    step, rest = steps[0], steps[1:]
    if isinstance(step, DescendantTag):
        _collect(x, (Tag(step.name),) + rest, found)
        for c in x.elements():
            _collect(c, steps, found)
        return
    if not satisfies(x, step):
        return
    if not rest:
        found[id(x)] = x
    elif isinstance(rest[0], Attr):
        if x.attr(rest[0].name) is not None:
            found[id(x)] = x
    elif isinstance(rest[0], TextStep):
        if _texts(x):
            found[id(x)] = x
    else:
        for c in x.elements():
            _collect(c, rest, found)


def answer_items(elements, q: XPathExpr) -> list:
    """Turn matched elements into answer items according to ``q``'s leaf."""
    leaf = q.leaf
    out = []
    for e in elements:
        if isinstance(leaf, Attr):
            v = e.attr(leaf.name)
            out.append(Element(leaf.name, [], [Text(v)] if v else []))
        elif isinstance(leaf, TextStep):
            out.extend(Text(t.value) for t in _texts(e))
        else:
            out.append(_clean(e))
    return out


def extract_answer(sub: Optional[XmlTree], q: XPathExpr) -> list:
    """Answer items read back from ``subtree(X, q)``."""
    if sub is None:
        return []
    return answer_items(matched(sub, q), q)


def evaluate(doc: XmlTree, q: XPathExpr) -> list:
    return extract_answer(subtree(doc, q), q)
