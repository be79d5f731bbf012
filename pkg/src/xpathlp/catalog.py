"""Synthetic book catalogs for benchmarking.

The catalogs follow the shape of a small, loosely structured book list:
``book`` records with authors, a title and a review, optional ``year`` and
``pages`` attributes, authors that sometimes carry language attributes or a
nested ``name``, and an occasional ``book2``/``review2`` variant.
"""

from __future__ import annotations

import random

from .xml_model import Element, Text, XmlTree, serialize

ELEMENTS_PER_KB = 516 / 64
REVIEWS = ("good", "Good", "very good", "Very good", "average", "poor")
FIRST = ("Brian", "John", "Dino", "Leon", "Ehud", "Elliotte", "Serge", "Dan", "Peter")
LAST = ("Benz", "Durant", "Esposito", "Sterling", "Shapiro", "Harold", "Abiteboul",
        "Suciu", "Buneman")
WORDS = ("XML", "Prolog", "Logic", "Programming", "Bible", "Data", "Web", "Art",
         "Queries", "Databases", "Semistructured", "Applied")


def _leaf(tag, text, attrs=()):
    return Element(tag, list(attrs), [Text(text)])


def _book(rng: random.Random, n: int) -> Element:
    variant = rng.random() < 0.1
    attrs = []
    if rng.random() < 0.8:
        attrs.append(("year", str(rng.randint(1990, 2008))))
    if rng.random() < 0.4:
        attrs.append(("pages", str(rng.randint(100, 1200))))
    kids = []
    for _ in range(rng.randint(1, 3)):
        name = f"{rng.choice(FIRST)} {rng.choice(LAST)}"
        if rng.random() < 0.15:
            kids.append(Element("author", [("english", rng.choice(("yes", "no")))],
                                [Text(rng.choice(LAST) + " "),
                                 _leaf("name", rng.choice(FIRST))]))
        else:
            kids.append(_leaf("author", name))
    title = " ".join(rng.choice(WORDS) for _ in range(rng.randint(2, 4)))
    kids.append(_leaf("title", f"{title} {n}"))
    kids.append(_leaf("review2" if variant else "review", rng.choice(REVIEWS)))
    return Element("book2" if variant else "book", attrs, kids)


def _count(e: Element) -> int:
    return 1 + sum(_count(c) for c in e.children if isinstance(c, Element))


def catalog(elements: int, seed: int = 0, target_bytes: int = 0) -> XmlTree:
    """A catalog with at least ``elements`` elements (root included).

    With ``target_bytes`` the titles are padded so that the serialized
    document is roughly that large.
    """
    rng = random.Random(seed)
    books, count = [], 1
    while count < elements:
        b = _book(rng, len(books) + 1)
        books.append(b)
        count += _count(b)
    doc = XmlTree(Element("books", [], books))
    if target_bytes and books:
        size = len(serialize(doc))
        pad = max(0, (target_bytes - size) // len(books))
        for b in books:
            title = next(c for c in b.children if isinstance(c, Element) and c.tag == "title")
            title.children = [Text(title.text + " " + "x" * max(0, pad - 1) if pad else title.text)]
    return doc


def catalog_for_kb(kb: int, seed: int = 0) -> XmlTree:
    """A catalog sized like the benchmark files: ``kb`` KB, ~8 elements per KB."""
    return catalog(round(kb * ELEMENTS_PER_KB), seed, kb * 1024)
