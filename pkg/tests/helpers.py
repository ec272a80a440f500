"""Random instance builders shared by the test modules."""
import numpy as np

from pcausality.core import Region, State, StochMap
from pcausality.validation import random_stochastic


def random_region(rng, cells, max_dim=3):
    return Region(tuple(cells), tuple(int(d) for d in rng.integers(1, max_dim + 1, size=len(cells))))


def random_map(rng, in_region, out_region, concentration=1.0):
    return StochMap(in_region, out_region,
                    random_stochastic(out_region.size, in_region.size, rng, concentration))


def random_state(rng, region):
    return State(region, rng.dirichlet(np.ones(region.size)))
