"""XPath evaluation over XML documents translated into logic programs.

Typical use::

    from xpathlp import load_program, MemoryFactStore, parse_xpath, evaluate

    program = load_program("books.xml")
    result = evaluate(MemoryFactStore(program), parse_xpath("/books//title"))
    print(result.result_xml())
"""

from .engine import QueryResult, evaluate, result_xml, solve
from .errors import (EmptySpecialization, EngineInvariantViolation, InconsistentAtoms,
                     OccursViolation, ParseError, QueryParseError, ReservedAttribute,
                     StoreCorrupt, TermSyntaxError, UnsupportedFeature, XPathLPError)
from .fact_store import FileFactStore, MemoryFactStore, open_store, write_store
from .translator import Program, rebuild_doc, translate
from .xml_model import XmlTree, number_tree, parse_file, parse_xml, serialize, strip_numbers
from .xpath import XPathExpr, parse_xpath


def load_program(path) -> Program:
    """Parse, number and translate the XML file at ``path``."""
    return translate(number_tree(parse_file(path)))


__all__ = [
    "EmptySpecialization", "EngineInvariantViolation", "FileFactStore", "InconsistentAtoms",
    "MemoryFactStore", "OccursViolation", "ParseError", "Program", "QueryParseError",
    "QueryResult", "ReservedAttribute", "StoreCorrupt", "TermSyntaxError",
    "UnsupportedFeature", "XPathExpr", "XPathLPError", "XmlTree", "evaluate",
    "load_program", "number_tree", "open_store", "parse_file", "parse_xml", "parse_xpath",
    "rebuild_doc", "result_xml", "serialize", "solve", "strip_numbers", "translate",
    "write_store",
]
