import numpy as np
import pytest

from lawluo.backends import MockBackend


class CountingBackend:
    """Wraps a backend and counts chat/embed calls."""

    def __init__(self, inner=None):
        self.inner = inner or MockBackend()
        self.chat_calls = 0
        self.embed_calls = 0

    @property
    def dimension(self):
        return self.inner.dimension

    @property
    def tag(self):
        return getattr(self.inner, "tag", "wrapped")

    def chat(self, request):
        self.chat_calls += 1
        return self.inner.chat(request)

    def embed(self, texts):
        self.embed_calls += 1
        return self.inner.embed(texts)


class StubEmbedBackend:
    """Maps texts to preassigned vectors; chat delegates to the mock."""

    tag = "stub"

    def __init__(self, mapping, dimension):
        self.mapping = {k: np.asarray(v, dtype=float) for k, v in mapping.items()}
        self.dimension = dimension
        self._mock = MockBackend()

    def chat(self, request):
        return self._mock.chat(request)

    def embed(self, texts):
        return [self.mapping[t] for t in texts]


@pytest.fixture
def mock_backend():
    return MockBackend()


@pytest.fixture
def counting_backend():
    return CountingBackend()


# scripted 4-turn consultation with one clarification pause (golden fixture)
CONSULT_SCRIPT = [
    "I want a divorce, what should I do?",
    "@marks 2=yes 3=no 5=yes",
    "We have been married 5 years and own an apartment together in the city center district.",
    "My spouse does not agree to the divorce and refuses to discuss the division of our property.",
    "There are no children involved and I mainly want to keep my share of the apartment value.",
]
