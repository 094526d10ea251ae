import numpy as np
import pytest

from beamacq import PhysicalConfig, build_codebook


@pytest.fixture(scope="session")
def paper_config():
    return PhysicalConfig()


@pytest.fixture(scope="session")
def paper_codebook(paper_config):
    cfg = paper_config
    return build_codebook(cfg.num_antennas, cfg.num_beams, cfg.aoa_range_rad)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
