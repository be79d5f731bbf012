import pytest
from hypothesis import given

from generators import documents
from xpathlp.errors import ParseError, ReservedAttribute
from xpathlp.xml_model import (UNLABELED, Element, Text, XmlTree, iter_elements, number_tree,
                               parse_xml, serialize, signature, strip_numbers)


def test_parse_mixed_content(books_doc):
    review = books_doc.root.elements()[0].elements()[4]
    assert [c.value if isinstance(c, Text) else c.tag for c in review.children] == \
        ["A ", "em", " book."]


def test_whitespace_between_elements_is_dropped():
    doc = parse_xml("<a>\n  <b>x</b>\n</a>")
    assert [c.tag for c in doc.root.children] == ["b"]


def test_running_example_numbering(books_doc):
    n = number_tree(books_doc)
    book1, book2 = n.root.elements()
    assert (n.root.node, n.root.type) == ((1,), 1)
    assert (book1.node, book1.type, book1.child_type) == ((1, 1), 2, 3)
    assert [c.node for c in book1.elements()] == [(1, 1, i) for i in range(1, 6)]
    review1 = book1.elements()[4]
    review2 = book2.elements()[2]
    # weakly distinct reviews get different child types
    assert (review1.child_type, review2.child_type) == (4, 5)
    em = review2.elements()[0]
    assert [c.tag for c in em.children] == [UNLABELED, "em", UNLABELED]
    assert {c.type for c in em.children} == {6}


def test_text_in_mixed_content_becomes_unlabeled(books_doc):
    n = number_tree(books_doc)
    review = n.root.elements()[0].elements()[4]
    first = review.children[0]
    assert first.tag == UNLABELED and first.text == "A " and first.node == (1, 1, 5, 1)


@pytest.mark.parametrize("xml", ['<a nodenumber="1"/>', '<a><b typenumber="2"/></a>',
                                 "<a><unlabeled/></a>"])
def test_reserved_names_rejected(xml):
    with pytest.raises(ReservedAttribute):
        parse_xml(xml)


@pytest.mark.parametrize("xml", ["<a>", "<a></b>", '<!DOCTYPE a><a/>',
                                 '<x:a xmlns:x="urn:x"/>'])
def test_malformed_rejected(xml):
    with pytest.raises(ParseError):
        parse_xml(xml)


def test_serialize_with_numbers(books_doc):
    text = serialize(number_tree(books_doc), with_numbers=True)
    assert '<books nodenumber="1" typenumber="1">' in text
    assert '<author nodenumber="1.1.3" typenumber="3">Suciu</author>' in text


def test_serialize_escapes():
    doc = XmlTree(Element("a", [("k", 'x"<')], [Text("1 < 2 & 3")]))
    assert serialize(doc) == '<a k="x&quot;&lt;">1 &lt; 2 &amp; 3</a>'
    assert serialize(parse_xml(serialize(doc))) == serialize(doc)


def test_signature_distinguishes_weakly_distinct():
    a = Element("book", [("year", "1")], [Element("author", [], [Text("x")])])
    b = Element("book", [("year", "2")], [Element("title", [], [Text("y")])])
    assert signature(a) != signature(b)
    assert signature(a) == signature(Element("book", [("year", "9")], [
        Element("author", [], [Text("z")]), Element("author", [], [Text("w")])]))


@given(documents())
def test_numbering_is_dense_and_monotone(doc):
    n = number_tree(doc)
    for e in iter_elements(n.root):
        kids = [c for c in e.children if isinstance(c, Element)]
        assert [c.node for c in kids] == [e.node + (i,) for i in range(1, len(kids) + 1)]
        for c in kids:
            assert c.type == e.child_type
            assert c.type > e.type


@given(documents())
def test_types_are_shared_by_similar_elements(doc):
    # elements with one tag, one signature and one parent kind share a child type
    n = number_tree(doc)
    seen = {}
    stack = [(n.root, None)]
    while stack:
        e, parent = stack.pop()
        if not e.is_terminal:
            key = (parent, signature(e))
            assert seen.setdefault(key, e.child_type) == e.child_type
        stack += [(c, e.child_type) for c in e.children if isinstance(c, Element)]


@given(documents())
def test_strip_inverts_numbering(doc):
    assert serialize(strip_numbers(number_tree(doc))) == serialize(doc)
