from pathlib import Path

import pytest

from fuzzyqa.engine import Corpus, index_corpus
from fuzzyqa.cocluster import CoClusterConfig
from fuzzyqa.fuzzyscale import load_sense_bank
from fuzzyqa.ontology import load_taxonomy
from fuzzyqa.textprep import TextPipeline
from fuzzyqa.thesaurus import load_thesaurus

FIXTURES = Path(__file__).parent / "fixtures"

QUESTION = "Painting by Ravi with subject Blossom"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def text():
    return TextPipeline.default()


@pytest.fixture(scope="session")
def plants():
    return load_taxonomy((FIXTURES / "plants.tsv").read_text())


@pytest.fixture(scope="session")
def taxonomy20():
    return load_taxonomy((FIXTURES / "taxonomy20.tsv").read_text())


@pytest.fixture(scope="session")
def thesaurus():
    return load_thesaurus((FIXTURES / "thesaurus.txt").read_text())


@pytest.fixture(scope="session")
def senses():
    return load_sense_bank((FIXTURES / "senses.tsv").read_text())


@pytest.fixture(scope="session")
def corpus():
    return Corpus.from_directory(FIXTURES / "corpus")


@pytest.fixture(scope="session")
def index(corpus, plants, thesaurus, text):
    return index_corpus(corpus, plants, thesaurus, CoClusterConfig(n_clusters=2, seed=0), text=text)


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        line = f"[{'PASS' if ok else 'FAIL'}] AC{number}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
