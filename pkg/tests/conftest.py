import numpy as np
import pytest

from nctransport import build_context


@pytest.fixture(scope="session")
def ctx1():
    """One generator, trivial modular group (tracial)."""
    return build_context([], 1)


@pytest.fixture(scope="session")
def ctx2():
    """Two generators, trivial modular group."""
    return build_context([], 2)


@pytest.fixture(scope="session")
def lam2():
    """Two generators with block parameter 2 (genuinely non-tracial)."""
    return build_context([2.0])


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
