import io
from pathlib import Path

import pytest

from xpathlp.cli import main

DATA = Path(__file__).parent / "data"
TRACE_QUERY = '/books/book[@year="2002" and author="Buneman"]/review'
GOLDEN = {
    '/books/book[author="Suciu"]/title': "<result><title>Data on the Web</title></result>",
    "/books//title": "<result><title>Data on the Web</title><title>XML in Scotland</title></result>",
    "/books/book/author": "<result><author>Abiteboul</author><author>Buneman</author>"
                          "<author>Suciu</author><author>Buneman</author></result>",
    TRACE_QUERY: "<result><review><em>The <em>best</em> ever!</em></review></result>",
}


def run(*argv, stdin=None):
    out = io.StringIO()
    code = main([str(a) for a in argv], out, io.StringIO(stdin) if stdin is not None else None)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def store(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli") / "books"
    code, out = run("load", DATA / "books.xml", d)
    assert code == 0
    return d


def test_load_counts(tmp_path):
    code, out = run("load", DATA / "books.xml", tmp_path / "s")
    assert code == 0
    assert out.startswith("5 rules, 14 facts (translated in ")


def test_load_variants_gives_variant_rules(tmp_path):
    code, out = run("load", DATA / "variants.xml", tmp_path / "s")
    assert code == 0 and out.startswith("10 rules, 52 facts")
    rules = (tmp_path / "s" / "rules.lp").read_text().splitlines()
    assert any(r.startswith("book2(book2type(") for r in rules)
    for terminal in ("review2", "name2"):
        assert any(f" {terminal}({terminal.capitalize()}," in r for r in rules)


def test_load_rejects_reserved_attribute(tmp_path, capsys):
    xml = tmp_path / "bad.xml"
    xml.write_text('<a nodenumber="1"/>')
    code, _ = run("load", xml, tmp_path / "s")
    assert code == 2
    assert "nodenumber" in capsys.readouterr().err


def test_load_missing_file(tmp_path):
    assert run("load", tmp_path / "none.xml", tmp_path / "s")[0] == 3


@pytest.mark.parametrize("query", sorted(GOLDEN))
def test_query_golden(store, query):
    code, out = run("query", store, query)
    assert code == 0 and out == GOLDEN[query] + "\n"


@pytest.mark.parametrize("query", sorted(GOLDEN) + ["//em", "/books/book/@year"])
def test_flags_do_not_change_results(store, query):
    base = run("query", store, query)[1]
    assert run("query", store, query, "--no-index")[1] == base
    assert run("query", store, query, "--no-specialize")[1] == base
    assert run("query", store, query, "--no-index", "--no-specialize")[1] == base


def test_query_oracle(store):
    code, out = run("query", store, TRACE_QUERY, "--oracle")
    assert code == 0 and out.endswith("oracle: match\n")


def test_query_trace(store):
    code, out = run("query", store, TRACE_QUERY, "--trace")
    lines = out.splitlines()
    assert lines[0] == "call book(booktype('Buneman',_,_,['2002']),_,2)"
    assert "index2 em @11 #12: em('best',[2,1,3,2,1],6) success" in lines
    assert lines[-1] == GOLDEN[TRACE_QUERY]


def test_query_answers(store):
    code, out = run("query", store, '/books/book[author="Suciu"]/title', "--answers")
    assert out.splitlines()[:2] == ["goal book(booktype('Suciu',Title,Review,[Year]),Node,2)",
                                    "  Title/'Data on the Web', Node/[1,1]"]


def test_query_time_goes_to_stderr(store, capsys):
    code, out = run("query", store, "/books", "--time")
    assert code == 0 and "evaluation" not in out
    assert capsys.readouterr().err.startswith("evaluation ")


def test_query_output_file(store, tmp_path):
    target = tmp_path / "r.xml"
    code, out = run("query", store, "/books/book/author", "-o", target)
    assert code == 0 and out == ""
    assert target.read_text() == GOLDEN["/books/book/author"] + "\n"


def test_query_batch_from_stdin(store):
    code, out = run("query", store, "-", stdin="/books/book/author\n\n/books//title\n")
    assert code == 0
    assert out.splitlines() == [GOLDEN["/books/book/author"], GOLDEN["/books//title"]]


@pytest.mark.parametrize("argv,code", [
    (["query"], 1),
    (["frobnicate"], 1),
    (["bench", "x", "--sizes", "a,b"], 1),
])
def test_usage_errors(argv, code):
    assert run(*argv)[0] == code


def test_query_parse_error(store):
    assert run("query", store, "/books/book[")[0] == 2


def test_query_rejects_unsupported_axis(store):
    assert run("query", store, "/books/book/..")[0] == 2


def test_query_missing_store(tmp_path):
    assert run("query", tmp_path, "/books")[0] == 3


def test_query_corrupt_store(store, tmp_path):
    import shutil
    bad = tmp_path / "bad"
    shutil.copytree(store, bad)
    (bad / "index2.tab").write_text("garbage\n")
    assert run("query", bad, "/books")[0] == 3


def test_explain(store):
    code, out = run("explain", store, TRACE_QUERY)
    assert code == 0
    assert out.splitlines()[1] == "fe: /books/book[@year and author]/review"
    assert "book(booktype('Buneman',Title,Review,['2002']),Node,2)" in out


def test_bench_small(tmp_path):
    qfile = tmp_path / "q.txt"
    qfile.write_text("# comment\n/books/book/title\n")
    code, out = run("bench", tmp_path / "stores", "--sizes", "0,4", "--queries", qfile)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "query: /books/book/title"
    assert lines[1].split() == ["size", "config", "translation", "evaluation", "browsing",
                                "total", "touched", "answers"]
    rows = [ln.split() for ln in lines[2:10]]
    assert [r[:2] for r in rows] == [[s, c] for s in ("0KB", "4KB")
                                     for c in ("spec+index", "spec", "index", "plain")]
    assert all(r[-1] == "0" for r in rows[:4])
    assert len({r[-1] for r in rows[4:]}) == 1 and rows[4][-1] != "0"
    assert "speedup from specialization" in lines[10] and "4KB" in lines[11]
