import pytest

from _synth import generate_corpus_text


@pytest.fixture(scope="session")
def surrogate_corpus(tmp_path_factory):
    """~10 MB topic-structured Zipf corpus shared by the acceptance tests."""
    path = tmp_path_factory.mktemp("corpus") / "surrogate.txt"
    path.write_text(generate_corpus_text())
    return path
