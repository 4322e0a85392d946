import numpy as np
import pytest

from lmszpair.propagation import TwoQubitState


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_state(rng) -> TwoQubitState:
    vec = rng.normal(size=4) + 1j * rng.normal(size=4)
    vec /= np.linalg.norm(vec)
    return TwoQubitState.from_amplitudes(vec)
