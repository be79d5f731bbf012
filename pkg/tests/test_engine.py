from collections import Counter
from pathlib import Path

import pytest
from hypothesis import given, settings

from generators import doc_and_query, documents
from xpathlp import engine, load_program, oracle
from xpathlp.engine import Call, Clause, Solver
from xpathlp.errors import EngineInvariantViolation
from xpathlp.fact_store import MemoryFactStore, open_store, write_store
from xpathlp.specializer import goals, specialize_rules
from xpathlp.terms import Seq, Var
from xpathlp.translator import Atom, translate
from xpathlp.xml_model import number_tree, parse_xml, serialize, strip_numbers
from xpathlp.xpath import Or, Tag, TagCond, XPathExpr, parse_xpath
from xpathlp.xpath import Path as PathCond

DATA = Path(__file__).parent / "data"
MODES = [(True, True), (True, False), (False, True), (False, False)]
TRACE_QUERY = '/books/book[@year="2002" and author="Buneman"]/review'


def _run(store, text, **kw):
    return engine.evaluate(store, parse_xpath(text), **kw)


# -- goal answers

def _answers(store, p, text):
    q = parse_xpath(text)
    (g,) = goals(q, p)
    return [a.bindings_text() for a in engine.solve(g.atom, specialize_rules(p, q), store)]


def test_authors_answers(books, books_store):
    assert _answers(books_store, books, "/books/book/author") == [
        "Author/'Abiteboul', Node/[1,1,1]",
        "Author/'Buneman', Node/[2,1,1]",
        "Author/'Suciu', Node/[3,1,1]",
        "Author/'Buneman', Node/[1,2,1]",
    ]


def test_books_answers(books, books_store):
    got = _answers(books_store, books, "/books/book")
    assert len(got) == 8
    assert got[0] == ("Book/booktype('Abiteboul','Data on the Web',"
                      "reviewtype('A ','fine',[]),['2003']), Node/[1,1]")
    assert got[7] == ("Book/booktype('Buneman','XML in Scotland',"
                      "reviewtype(emtype(' ever!','best',[]),[]),['2002']), Node/[2,1]")


def test_suciu_answer(books, books_store):
    assert _answers(books_store, books, '/books/book[author="Suciu"]/title') == [
        "Title/'Data on the Web', Node/[1,1]"]


# -- result documents

@pytest.mark.parametrize("query,xml", [
    ("/books/book/author", "<result><author>Abiteboul</author><author>Buneman</author>"
                           "<author>Suciu</author><author>Buneman</author></result>"),
    ('/books/book[author="Suciu"]/title', "<result><title>Data on the Web</title></result>"),
    (TRACE_QUERY, "<result><review><em>The <em>best</em> ever!</em></review></result>"),
    ("/books/book/@year", "<result><year>2003</year><year>2002</year></result>"),
    ("/books/book/title/text()", "<result>Data on the WebXML in Scotland</result>"),
    ("//em", "<result><em>fine</em><em>The <em>best</em> ever!</em><em>best</em></result>"),
    ('/books/book[author="Nobody"]/title', "<result/>"),
    ("/books/book/nothing", "<result/>"),
    ('/books/book[author="Suciu" or @year="2002"]/title',
     "<result><title>Data on the Web</title><title>XML in Scotland</title></result>"),
])
def test_result_xml(books_store, query, xml):
    assert _run(books_store, query).result_xml() == xml


def test_books_result_is_whole_document(books_store, books_doc):
    r = _run(books_store, "/books/book")
    assert r.result_xml() == "<result>" + "".join(
        serialize(c) for c in books_doc.root.elements()) + "</result>"


def test_answer_doc_is_branch_with_witnesses(books_store):
    doc = _run(books_store, '/books/book[author="Suciu"]/title').answer_doc
    assert serialize(strip_numbers(doc)) == (
        '<books><book year="2003"><author>Suciu</author>'
        "<title>Data on the Web</title></book></books>")


def test_trace(books_store):
    lines = _run(books_store, TRACE_QUERY, trace=True).trace
    assert lines[:6] == [
        "call book(booktype('Buneman',_,_,['2002']),_,2)",
        "call year('2002',_,3)",
        "index1 year @0: year('2003',[1,1],3) fail",
        "index1 year @8: year('2002',[2,1],3) success [group [2, 1] @8]",
        "call author('Buneman',[_,2,1],3)",
        "index2 author @8 #9: author('Buneman',[1,2,1],3) success",
    ]
    assert "success book(booktype('Buneman',_,reviewtype(emtype('The ','best',[]),[]),"\
           "['2002']),[2,1],2)" in lines
    assert lines[-1] == "success book(booktype(_,_,_,['2002']),[2,1],2)"


def test_trace_without_index_uses_linear_scan(books_store):
    lines = _run(books_store, "/books/book/author", use_index=False, trace=True).trace
    assert not any(ln.startswith(("index1", "index2")) for ln in lines)
    assert "scan author #1: author('Abiteboul',[1,1,1],3) success" in lines


def test_specialization_touches_fewer_facts(books_store):
    q = '/books/book[author="Suciu"]/title'
    spec = _run(books_store, q).counters.facts_touched
    plain = _run(books_store, q, specialize=False).counters.facts_touched
    assert spec < plain


def test_answers_text(books_store):
    text = _run(books_store, '/books/book[author="Suciu"]/title').answers_text()
    assert text == ("goal book(booktype('Suciu',Title,Review,[Year]),Node,2)\n"
                    "  Title/'Data on the Web', Node/[1,1]\n")


def test_mixed_shapes_query():
    p = load_program(DATA / "mixed_shapes.xml")
    r = engine.query_program(p, parse_xpath('/books/book[@year="2002"]/author[name="Serge"]'))
    ref = oracle.evaluate(strip_numbers(engine.rebuild_doc(p.rules, p.facts)),
                          parse_xpath('/books/book[@year="2002"]/author[name="Serge"]'))
    assert r.result_xml() == engine.result_xml(ref) == "<result/>"
    r = engine.query_program(p, parse_xpath('/books/book[@year="2003"]/author[name="Serge"]'))
    assert r.result_xml() == "<result><author>Abiteboul<name>Serge</name></author></result>"


def test_variant_queries_match_oracle(variants):
    doc = strip_numbers(engine.rebuild_doc(variants.rules, variants.facts))
    store = MemoryFactStore(variants)
    for text in ["/books/book/title", "//author", "/books/*/title",
                 '/books/book[@year="2003"]/author', "//title/text()"]:
        q = parse_xpath(text)
        for spec, index in MODES:
            got = engine.evaluate(store, q, specialize=spec, use_index=index)
            assert got.result_xml() == engine.result_xml(oracle.evaluate(doc, q)), text


def test_file_store_matches_memory(books_store, books_file_store):
    for text in ["/books/book", TRACE_QUERY, "//em", "/books/book/@year"]:
        a = _run(books_store, text, trace=True)
        b = _run(books_file_store, text, trace=True)
        assert a.result_xml() == b.result_xml()
        assert a.trace == b.trace
        assert a.counters.as_dict() == b.counters.as_dict()


def test_depth_tripwire(books_store):
    loop = Atom("a", Var("X"), Var("N"), 1)
    body = (Call(Atom("a", Var("X"), Seq((Var("M"),), Var("N")), 1), "whole", facts=False),)
    solver = Solver({("whole", "a", 1): [Clause(loop, body)]},
                    books_store.evaluation(), max_depth=5)
    with pytest.raises(EngineInvariantViolation):
        list(solver.solve(Call(loop, "whole", facts=False)))


# -- properties

@settings(max_examples=150)
@given(doc_and_query())
def test_engine_matches_oracle(dq):
    doc, q = dq
    store = MemoryFactStore(translate(number_tree(doc)))
    want = engine.result_xml(oracle.evaluate(doc, q))
    sub = oracle.subtree(doc, q)
    for spec, index in MODES:
        got = engine.evaluate(store, q, specialize=spec, use_index=index)
        assert got.result_xml() == want, (spec, index)
        have = None if got.answer_doc is None else serialize(strip_numbers(got.answer_doc))
        assert have == (None if sub is None else serialize(sub)), (spec, index)


@settings(max_examples=30)
@given(doc_and_query())
def test_file_store_equivalence(tmp_path_factory, dq):
    doc, q = dq
    p = translate(number_tree(doc))
    d = tmp_path_factory.mktemp("s")
    write_store(p, d)
    mem = engine.evaluate(MemoryFactStore(p), q, trace=True)
    with open_store(d) as fs:
        got = engine.evaluate(fs, q, trace=True)
    assert got.result_xml() == mem.result_xml()
    assert got.trace == mem.trace


@given(doc_and_query())
def test_or_is_union(dq):
    doc, q = dq
    store = MemoryFactStore(translate(number_tree(doc)))
    steps = q.steps
    if len(steps) < 2:
        return
    name = getattr(steps[0], "name", None)
    if name is None:
        return
    left = XPathExpr((Tag(name),) + steps[1:])
    both = XPathExpr((TagCond(name, Or(PathCond(XPathExpr((Tag("b"),))),
                                             PathCond(XPathExpr((Tag("c"),))))),) + steps[1:])
    b = XPathExpr((TagCond(name, PathCond(XPathExpr((Tag("b"),)))),) + steps[1:])
    c = XPathExpr((TagCond(name, PathCond(XPathExpr((Tag("c"),)))),) + steps[1:])
    got = engine.evaluate(store, both).finals
    union = sorted(set(engine.evaluate(store, b).finals) | set(engine.evaluate(store, c).finals))
    assert got == union
    assert set(got) <= set(engine.evaluate(store, left).finals)


def _condition_free(q):
    return not any(isinstance(s, TagCond) for s in q.steps)


@given(doc_and_query())
def test_condition_free_specialization_touches_a_subset(dq):
    doc, q = dq
    if not _condition_free(q):
        return
    store = MemoryFactStore(translate(number_tree(doc)))
    spec = Counter(engine.evaluate(store, q).touched)
    plain = Counter(engine.evaluate(store, q, specialize=False).touched)
    assert not spec - plain


def test_reordering_can_touch_facts_plain_order_skips():
    """Condition atoms run first when specialized, so a condition fact can be
    touched where the plain body order fails earlier on the step atom."""
    doc = parse_xml('<a y="u">t<a>u</a></a>')
    p = translate(number_tree(doc))
    store = MemoryFactStore(p)
    q = parse_xpath('/a[@y="u"]/a/@x')
    spec = engine.evaluate(store, q)
    plain = engine.evaluate(store, q, specialize=False)
    assert spec.result_xml() == plain.result_xml() == "<result/>"
    extra = Counter(spec.touched) - Counter(plain.touched)
    assert [store.fact(i).pred for i in extra] == ["y"]


@given(documents())
def test_root_query_returns_document(doc):
    store = MemoryFactStore(translate(number_tree(doc)))
    r = engine.evaluate(store, parse_xpath("/" + doc.root.tag))
    assert r.result_xml() == "<result>" + serialize(doc.root) + "</result>"


@given(doc_and_query())
def test_cache_and_index_do_not_change_fact_sequence(dq):
    doc, q = dq
    store = MemoryFactStore(translate(number_tree(doc)))
    cached = engine.evaluate(store, q)
    uncached = engine.evaluate(store, q, use_cache=False)
    scanned = engine.evaluate(store, q, use_index=False)
    assert cached.touched == uncached.touched == scanned.touched
    assert cached.facts == uncached.facts == scanned.facts
