"""Walk the two-book example from XML to logic program to query answers."""

from pathlib import Path

from xpathlp import MemoryFactStore, evaluate, load_program, parse_xpath

DOC = Path(__file__).parent.parent / "tests" / "data" / "books.xml"


def main():
    program = load_program(DOC)
    print("Schema rules, one per record shape:")
    for rule in program.rules:
        print(" ", rule)
    print("\nFacts, grouped by record:")
    for fact in program.facts:
        print(" ", fact)

    store = MemoryFactStore(program)
    for text in ["/books/book/author", '/books/book[author="Suciu"]/title', "/books//title",
                 "/books/book/@year", "//em"]:
        result = evaluate(store, parse_xpath(text))
        print(f"\n{text}")
        print(result.answers_text(), end="")
        print(result.result_xml())


if __name__ == "__main__":
    main()
