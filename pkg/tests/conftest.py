import pytest

from depthproj.corpus import bernoulli_corpus, scanline_corpus


@pytest.fixture(scope="session")
def scanline50():
    """Aligned pillar corpus, strided sampling (50 scenes, fixed seed)."""
    return scanline_corpus(n_scenes=50, seed=2024)


@pytest.fixture(scope="session")
def bernoulli50():
    """Aligned pillar corpus, i.i.d. sampling with close pairs (50 scenes)."""
    return bernoulli_corpus(n_scenes=50, seed=4047)
