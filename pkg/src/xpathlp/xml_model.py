"""XML trees, node/type numbering and serialization.

Parsing is delegated to :mod:`xml.etree.ElementTree`; the tree is then
copied into the small :class:`Element`/:class:`Text` model used everywhere
else. Numbered trees use the same classes with ``node`` (dotted path as a
tuple, document order) and ``type`` filled in, and with the text children
of non-terminal elements wrapped in ``unlabeled`` elements.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from .errors import ParseError, ReservedAttribute

UNLABELED = "unlabeled"
RESERVED_ATTRIBUTES = ("nodenumber", "typenumber")


@dataclass
class Text:
    value: str


@dataclass
class Element:
    tag: str
    attrs: list = field(default_factory=list)
    children: list = field(default_factory=list)
    node: Optional[tuple] = field(default=None, compare=False)
    type: Optional[int] = field(default=None, compare=False)
    child_type: Optional[int] = field(default=None, compare=False)

    @property
    def is_terminal(self) -> bool:
        return not self.attrs and all(isinstance(c, Text) for c in self.children)

    @property
    def text(self) -> str:
        """Concatenated character data of a terminal element."""
        return "".join(c.value for c in self.children if isinstance(c, Text))

    def attr(self, name):
        for k, v in self.attrs:
            if k == name:
                return v
        return None

    def elements(self):
        return [c for c in self.children if isinstance(c, Element)]

    def __repr__(self):
        return f"<Element {self.tag} node={self.node} type={self.type}>"


Node = Union[Element, Text]


@dataclass
class XmlTree:
    root: Element


class Signature(NamedTuple):
    tag: str
    attr_names: frozenset
    child_tags: frozenset
    terminal: bool


# ---------------------------------------------------------------------------
# parsing


def parse_xml(text: str) -> XmlTree:
    if re.search(r"<!DOCTYPE", text):
        raise ParseError("DTDs are not supported")
    parser = ET.XMLParser()
    try:
        parser.feed(text)
        root = parser.close()
    except ET.ParseError as exc:
        raise ParseError(str(exc), getattr(exc, "position", None)) from None
    return XmlTree(_convert(root))


def parse_file(path) -> XmlTree:
    with open(path, encoding="utf-8") as fh:
        return parse_xml(fh.read())


def _check_name(name, what):
    if name.startswith("{") or ":" in name:
        raise ParseError(f"namespaced {what} {name!r} is not supported")


def _convert(e) -> Element:
    _check_name(e.tag, "tag")
    if e.tag == UNLABELED:
        raise ReservedAttribute(f"tag name {UNLABELED!r} is reserved")
    attrs = []
    for k, v in e.attrib.items():
        _check_name(k, "attribute")
        if k in RESERVED_ATTRIBUTES:
            raise ReservedAttribute(f"attribute name {k!r} is reserved")
        attrs.append((k, v))
    raw = []
    if e.text:
        raw.append(Text(e.text))
    for child in e:
        raw.append(_convert(child))
        if child.tail:
            raw.append(Text(child.tail))
    if any(isinstance(c, Element) for c in raw):
        raw = [c for c in raw if isinstance(c, Element) or c.value.strip()]
    return Element(e.tag, attrs, raw)


# ---------------------------------------------------------------------------
# structure


def signature(e: Element) -> Signature:
    terminal = e.is_terminal
    child_tags = set()
    for c in e.children:
        child_tags.add(c.tag if isinstance(c, Element) else UNLABELED)
    if terminal:
        child_tags = set()
    return Signature(e.tag, frozenset(k for k, _ in e.attrs),
                     frozenset(child_tags), terminal)


def number_tree(doc: XmlTree) -> XmlTree:
    """Copy ``doc`` assigning node numbers and type numbers.

    Types are handed out breadth-first in document order: every distinct
    (element type, tag, signature) context gets a fresh number for its
    children, so a type number pins down the tag path above it.
    """
    _reject_reserved(doc.root)
    root = Element(doc.root.tag, list(doc.root.attrs), [], (1,), 1)
    queue = deque([(doc.root, root)])
    contexts = {}
    counter = 2
    while queue:
        src, dst = queue.popleft()
        if src.is_terminal:
            dst.children = [Text(c.value) for c in src.children]
            continue
        key = (dst.type, src.tag, signature(src))
        child_type = contexts.get(key)
        if child_type is None:
            child_type = contexts[key] = counter
            counter += 1
        dst.child_type = child_type
        for j, c in enumerate(src.children, start=1):
            node = dst.node + (j,)
            if isinstance(c, Text):
                dst.children.append(
                    Element(UNLABELED, [], [Text(c.value)], node, child_type))
            else:
                n = Element(c.tag, list(c.attrs), [], node, child_type)
                dst.children.append(n)
                queue.append((c, n))
    return XmlTree(root)


def _reject_reserved(e: Element):
    for k, _ in e.attrs:
        if k in RESERVED_ATTRIBUTES:
            raise ReservedAttribute(f"attribute name {k!r} is reserved")
    for c in e.elements():
        _reject_reserved(c)


def strip_numbers(doc: XmlTree) -> XmlTree:
    """Inverse of :func:`number_tree`: drop numbers, unwrap ``unlabeled``."""

    def strip(e):
        kids = []
        for c in e.children:
            if isinstance(c, Text):
                kids.append(Text(c.value))
            elif c.tag == UNLABELED:
                kids.append(Text(c.text))
            else:
                kids.append(strip(c))
        return Element(e.tag, list(e.attrs), kids)

    return XmlTree(strip(doc.root))


def iter_elements(e: Element):
    """Pre-order traversal of elements."""
    yield e
    for c in e.children:
        if isinstance(c, Element):
            yield from iter_elements(c)


def dotted(node: tuple) -> str:
    return ".".join(str(i) for i in node)


# ---------------------------------------------------------------------------
# serialization


def _esc_text(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _esc_attr(s):
    return (_esc_text(s).replace('"', "&quot;").replace("\n", "&#10;")
            .replace("\r", "&#13;").replace("\t", "&#9;"))


def serialize(tree, with_numbers: bool = False) -> str:
    root = tree.root if isinstance(tree, XmlTree) else tree
    out = []
    _write(root, with_numbers, out)
    return "".join(out)


def _write(n, with_numbers, out):
    if isinstance(n, Text):
        out.append(_esc_text(n.value))
        return
    if n.tag == UNLABELED and not with_numbers:
        out.append(_esc_text(n.text))
        return
    attrs = list(n.attrs)
    if with_numbers and n.node is not None:
        attrs += [("nodenumber", dotted(n.node)), ("typenumber", str(n.type))]
    out.append("<" + n.tag)
    for k, v in attrs:
        out.append(f' {k}="{_esc_attr(v)}"')
    if not n.children:
        out.append("/>")
        return
    out.append(">")
    for c in n.children:
        _write(c, with_numbers, out)
    out.append(f"</{n.tag}>")
