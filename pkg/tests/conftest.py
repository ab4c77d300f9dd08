import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_decaying(rng, n, m, decay=0.7):
    """Random matrix with geometric singular value decay."""
    r = min(n, m)
    U = np.linalg.qr(rng.standard_normal((n, r)))[0]
    V = np.linalg.qr(rng.standard_normal((m, r)))[0]
    return U @ np.diag(decay ** np.arange(r)) @ V.T
