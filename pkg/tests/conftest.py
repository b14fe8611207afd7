import pytest
from hypothesis import settings

from frikt import targets
from frikt.evaluator import CompiledUnit

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

ARITY = "compute_log_arity_for_round"


@pytest.fixture(scope="session")
def corpus():
    return {e.name: e for e in targets.load_corpus()}


@pytest.fixture(scope="session")
def compiled(corpus):
    return {name: CompiledUnit(e.unit) for name, e in corpus.items()}


@pytest.fixture(scope="session")
def arity_unit(corpus):
    return corpus["arity"].unit


@pytest.fixture(scope="session")
def obligations(corpus):
    return {ob.id: (e, ob) for e in corpus.values() for ob in e.obligations}
