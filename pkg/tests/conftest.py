import numpy as np
import pytest

from dhaar.imaging import prepare
from dhaar.synth import generate
from dhaar.training import TrainingConfig, train


@pytest.fixture(scope="session")
def separable_small():
    """30+30 synthetic separable vectors, pipeline applied."""
    faces, clutters = generate("separable", 30, 1)
    return [prepare(f) for f in faces], [prepare(c) for c in clutters]


@pytest.fixture(scope="session")
def detector_trio(separable_small):
    """Classifiers at N = 256, 512, 1024 trained on the small separable set."""
    fv, cv = separable_small
    trio = []
    for n in (256, 512, 1024):
        c, _ = train(fv, cv, TrainingConfig(n_black=n // 2, n_white=n // 2))
        trio.append(c)
    return tuple(trio)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
