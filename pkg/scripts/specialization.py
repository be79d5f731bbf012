"""Show how a conditioned query is specialized, then trace its evaluation."""

from pathlib import Path

from xpathlp import MemoryFactStore, evaluate, load_program, parse_xpath
from xpathlp.specializer import explain

DOC = Path(__file__).parent.parent / "tests" / "data" / "books.xml"
QUERY = '/books/book[@year="2002" and author="Buneman"]/review'


def main():
    program = load_program(DOC)
    q = parse_xpath(QUERY)
    print(explain(q, program))

    store = MemoryFactStore(program)
    result = evaluate(store, q, trace=True)
    print("Resolution trace (index1: by predicate, index2: inside a cached record):")
    for line in result.trace:
        print(" ", line)
    print(result.result_xml())

    plain = evaluate(store, q, specialize=False)
    print(f"\nfacts touched: {result.counters.facts_touched} specialized, "
          f"{plain.counters.facts_touched} unspecialized")


if __name__ == "__main__":
    main()
