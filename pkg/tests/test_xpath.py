import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import core_queries, documents
from xpathlp.errors import QueryParseError, UnsupportedFeature
from xpathlp.xpath import (And, Attr, AttrEq, DescendantTag, Or, Path, Tag, TagCond, TagEq,
                           Text, Wildcard, XPathExpr, is_core, parse_xpath, to_text)


def test_query_one():
    q = parse_xpath('/books/book[author="Suciu"]/title')
    assert q.steps == (Tag("books"), TagCond("book", TagEq("author", "Suciu")), Tag("title"))


def test_unquoted_number_is_text():
    q = parse_xpath("/books/book[@year=2002 and author='Buneman']/review")
    assert q.steps[1].cond == And(AttrEq("year", "2002"), TagEq("author", "Buneman"))


def test_precedence_and_binds_tighter():
    q = parse_xpath("/a[b and c or d]")
    assert q.steps[0].cond == Or(And(Path(XPathExpr((Tag("b"),))),
                                     Path(XPathExpr((Tag("c"),)))),
                                 Path(XPathExpr((Tag("d"),))))


def test_nested_path_condition():
    q = parse_xpath("/books/book[author[name='Serge']/@id]/title")
    cond = q.steps[1].cond
    assert cond == Path(XPathExpr((TagCond("author", TagEq("name", "Serge")), Attr("id"))))


def test_leaves_and_extensions():
    assert parse_xpath("/a/b/@c").leaf == Attr("c")
    assert parse_xpath("/a/text()").leaf == Text()
    q = parse_xpath("//a/*/b")
    assert q.steps == (DescendantTag("a"), Wildcard(), Tag("b"))
    assert not is_core(q)
    assert is_core(parse_xpath("/a/b"))


@pytest.mark.parametrize("text", [
    "/a/..", "/a|/b", "/a/@*", "/a[1]", "/a[b<1]", "/a[b!=1]", "/parent::a",
    "//a[b]", "/*[b]", "//*", "//@a", "//text()", "/a[text()]", "/a[b//c]", "/a[*]",
    "/a/count(b)", "/a/unlabeled", "/a[/b]",
])
def test_unsupported(text):
    with pytest.raises(UnsupportedFeature):
        parse_xpath(text)


@pytest.mark.parametrize("text", ["", "a/b", "/a/", "/a[b", "/a[b=]", "/a/@b/c",
                                  "/a/text()/b", "/a[b='x]", "/a b"])
def test_malformed(text):
    with pytest.raises(QueryParseError):
        parse_xpath(text)


def test_error_position():
    with pytest.raises(QueryParseError) as exc:
        parse_xpath("/books/book[")
    assert exc.value.position == 12


def test_printing():
    text = '/books/book[@year="2002" and author="Buneman"]/review'
    assert to_text(parse_xpath(text)) == text
    assert to_text(parse_xpath("/a[(b or c) and d]")) == "/a[(b or c) and d]"
    assert to_text(parse_xpath("/a[b='say \"hi\"']")) == "/a[b='say \"hi\"']"


@given(documents().flatmap(core_queries))
def test_parse_print_fixed_point(q):
    once = parse_xpath(to_text(q))
    assert parse_xpath(to_text(once)) == once
    assert once == q


@given(st.text(alphabet="/ab[]@=\"' ()*.|andor", max_size=20))
def test_parser_never_crashes(text):
    try:
        parse_xpath(text)
    except QueryParseError:
        pass
