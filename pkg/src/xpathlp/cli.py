"""Command-line interface: ``load``, ``query``, ``explain`` and ``bench``.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 store error, 4 internal invariant.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import engine, oracle
from .catalog import catalog_for_kb
from .errors import (EngineInvariantViolation, OccursViolation, ParseError, QueryParseError,
                     StoreCorrupt, TermSyntaxError)
from .fact_store import open_store, write_store
from .specializer import explain
from .translator import rebuild_doc, translate
from .xml_model import number_tree, parse_file, strip_numbers
from .xpath import parse_xpath

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_STORE, EXIT_INVARIANT = 0, 1, 2, 3, 4
DEFAULT_QUERIES = ("/books", "/books/book/title", '/books/book[review="good"]/title')
CONFIGS = (("spec+index", True, True), ("spec", True, False),
           ("index", False, True), ("plain", False, False))


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: {message}")


def _ms(seconds: float) -> str:
    return f"{seconds * 1000:.1f}ms"


def _timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


# ---------------------------------------------------------------------------
# commands


def cmd_load(args, out) -> int:
    doc = parse_file(args.xml)
    program, elapsed = _timed(lambda: translate(number_tree(doc)))
    write_store(program, args.store)
    print(f"{len(program.rules)} rules, {len(program.facts)} facts "
          f"(translated in {_ms(elapsed)})", file=out)
    return EXIT_OK


def _query_texts(arg: str, stdin) -> list:
    if arg != "-":
        return [arg]
    return [ln.strip() for ln in stdin if ln.strip()]


def cmd_query(args, out) -> int:
    texts = _query_texts(args.xpath, args.stdin)
    if args.output and len(texts) > 1:
        raise _Usage("--output takes a single query")
    status = EXIT_OK
    with open_store(args.store) as store:
        for text in texts:
            status = max(status, _run_query(store, parse_xpath(text), args, out))
    return status


def _run_query(store, q, args, out) -> int:
    result, evaluation = _timed(engine.evaluate, store, q,
                                specialize=not args.no_specialize,
                                use_index=not args.no_index, trace=args.trace)
    xml, browsing = _timed(result.result_xml)
    if args.trace:
        for line in result.trace:
            print(line, file=out)
    if args.answers:
        out.write(result.answers_text())
    if args.output:
        Path(args.output).write_text(xml + "\n", encoding="utf-8")
    else:
        print(xml, file=out)
    if args.time:
        print(f"evaluation {_ms(evaluation)}, browsing {_ms(browsing)}", file=sys.stderr)
    if args.oracle:
        doc = strip_numbers(rebuild_doc(store.program.rules, list(store.facts())))
        want = engine.result_xml(oracle.evaluate(doc, q))
        if want != xml:
            print(f"oracle mismatch: expected {want}", file=out)
            return EXIT_INVARIANT
        print("oracle: match", file=out)
    return EXIT_OK


def cmd_explain(args, out) -> int:
    q = parse_xpath(args.xpath)
    with open_store(args.store) as store:
        out.write(explain(q, store.program))
    return EXIT_OK


def _store_dir(template: str, kb: int) -> Path:
    if "{size}" in template:
        return Path(template.format(size=kb))
    return Path(template) / f"{kb}KB"


def cmd_bench(args, out) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise _Usage(f"bad --sizes value {args.sizes!r}") from None
    if args.queries:
        lines = Path(args.queries).read_text(encoding="utf-8").splitlines()
        texts = [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    else:
        texts = list(DEFAULT_QUERIES)
    queries = [(t, parse_xpath(t)) for t in texts]
    translation = {}
    for kb in sizes:
        doc = catalog_for_kb(kb, seed=args.seed)
        program, translation[kb] = _timed(lambda: translate(number_tree(doc)))
        write_store(program, _store_dir(args.store_template, kb))
    for text, q in queries:
        print(f"query: {text}", file=out)
        print(f"{'size':>7} {'config':<11} {'translation':>12} {'evaluation':>11} "
              f"{'browsing':>9} {'total':>10} {'touched':>8} {'answers':>8}", file=out)
        speedups = []
        for kb in sizes:
            with open_store(_store_dir(args.store_template, kb)) as store:
                evals = {}
                for name, spec, index in CONFIGS:
                    r, ev = _timed(engine.evaluate, store, q, specialize=spec, use_index=index)
                    _, br = _timed(r.result_xml)
                    evals[name] = ev
                    total = translation[kb] + ev + br
                    print(f"{kb:>5}KB {name:<11} {_ms(translation[kb]):>12} {_ms(ev):>11} "
                          f"{_ms(br):>9} {_ms(total):>10} {r.counters.facts_touched:>8} "
                          f"{len(r.forest):>8}", file=out)
                ratio = evals["index"] / evals["spec+index"] if evals["spec+index"] else 0.0
                speedups.append((kb, ratio))
        for kb, ratio in speedups:
            print(f"{kb:>5}KB speedup from specialization: {ratio:.1f}x", file=out)
        print(file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="xpathlp", description="XPath queries over XML stored as logic programs.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("load", help="translate an XML file into a fact store")
    p.add_argument("xml")
    p.add_argument("store")
    p.set_defaults(fn=cmd_load)

    p = sub.add_parser("query", help="evaluate an XPath query against a store")
    p.add_argument("store")
    p.add_argument("xpath", nargs="?", default="-",
                   help="query text; '-' or omitted reads one query per line from stdin")
    p.add_argument("--no-specialize", action="store_true",
                   help="run goals against the unspecialized rules")
    p.add_argument("--no-index", action="store_true", help="scan the fact file linearly")
    p.add_argument("--oracle", action="store_true",
                   help="also evaluate directly on the document and compare")
    p.add_argument("--trace", action="store_true", help="print the resolution trace")
    p.add_argument("--answers", action="store_true", help="print the goal substitutions")
    p.add_argument("--time", action="store_true", help="print timings to stderr")
    p.add_argument("-o", "--output", help="write the result XML to this file")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("explain", help="show expansion, specialization and goals")
    p.add_argument("store")
    p.add_argument("xpath")
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("bench", help="benchmark generated catalogs in four configurations")
    p.add_argument("store_template",
                   help="directory for the generated stores, or a path with {size}")
    p.add_argument("--sizes", default="64,128,256,512,1024", help="sizes in KB")
    p.add_argument("--queries", help="file with one query per line")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None, out=None, stdin=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        args.stdin = stdin if stdin is not None else sys.stdin
        return args.fn(args, out)
    except _Usage as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, QueryParseError, TermSyntaxError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (StoreCorrupt, OSError) as exc:
        print(f"store error: {exc}", file=sys.stderr)
        return EXIT_STORE
    except (EngineInvariantViolation, OccursViolation) as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
