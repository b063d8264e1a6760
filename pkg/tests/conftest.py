import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def powerset(labels):
    """All subsets of ``labels`` as frozensets, smallest first."""
    labels = list(labels)
    return [frozenset(c) for r in range(len(labels) + 1) for c in itertools.combinations(labels, r)]


def as_sets(m):
    """Mass function as ``{frozenset(labels): mass}``."""
    return {frozenset(m.frame.labels_of(k)): v for k, v in m.items()}
