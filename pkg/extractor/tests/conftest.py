import pytest

from tiny_encoder import build_checkpoint


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    """Path (str) of a local tiny encoder checkpoint, built once per run."""
    return str(build_checkpoint(tmp_path_factory.mktemp("tiny-bert")))
