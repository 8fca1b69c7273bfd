import numpy as np
import pytest

import permreg as pr


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_perm(rng, n):
    return pr.Permutation(rng.permutation(n))
