from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from xpathlp import load_program
from xpathlp.fact_store import MemoryFactStore, open_store, write_store
from xpathlp.xml_model import parse_file

DATA = Path(__file__).parent / "data"

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow,
                                                 HealthCheck.data_too_large])
settings.load_profile("default")


@pytest.fixture(scope="session")
def books_doc():
    return parse_file(DATA / "books.xml")


@pytest.fixture(scope="session")
def books():
    return load_program(DATA / "books.xml")


@pytest.fixture(scope="session")
def books_store(books):
    return MemoryFactStore(books)


@pytest.fixture(scope="session")
def books_dir(books, tmp_path_factory):
    d = tmp_path_factory.mktemp("store") / "books"
    write_store(books, d)
    return d


@pytest.fixture
def books_file_store(books_dir):
    with open_store(books_dir) as store:
        yield store


@pytest.fixture(scope="session")
def variants():
    return load_program(DATA / "variants.xml")
