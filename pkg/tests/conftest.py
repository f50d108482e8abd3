from pathlib import Path

import pytest

from tmkit.dsl import load
from tmkit.sim import load_config

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
CORPUS_NAMES = ("person", "hammer", "chalice")


def corpus_model(name: str):
    return load(CORPUS / f"{name}.tm")


def corpus_config(name: str):
    return load_config(CORPUS / f"{name}.cfg")


@pytest.fixture(scope="session")
def person():
    return corpus_model("person")


@pytest.fixture(scope="session")
def hammer():
    return corpus_model("hammer")


@pytest.fixture(scope="session")
def chalice():
    return corpus_model("chalice")


@pytest.fixture(params=CORPUS_NAMES)
def corpus(request):
    return request.param, corpus_model(request.param), corpus_config(request.param)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
