from importlib import resources

import numpy as np
import pytest

from pilotforge.link import compute_alpha
from pilotforge.model import NetworkConfig, PilotBook, PowerAllocation
from pilotforge.scenario_io import load_scenario


@pytest.fixture(scope="session")
def table1():
    """Bundled two-cell benchmark scenario with the adjusted-target override."""
    return load_scenario(resources.files("pilotforge") / "data" / "table1.scenario")


@pytest.fixture(scope="session")
def asymmetric_network():
    """Factory for fully asymmetric random networks (book, config, powers).

    No symmetry anywhere, so index-order mistakes cannot cancel out.
    """

    def make(seed, L=3, K=4, tau=3):
        rng = np.random.default_rng(seed)
        seq = rng.standard_normal((tau, L * K))
        seq /= np.linalg.norm(seq, axis=0)
        book = PilotBook(seq, L, K)
        xi2 = rng.uniform(0.2, 1.0, (L, K, L))
        beta = rng.uniform(0.3, 1.5, (L, K, L))
        idx = np.arange(L)
        xi2[idx, :, idx] = 1.0
        cfg = NetworkConfig(L, K, tau, 0.8, 1.3, xi2, beta)
        alpha = compute_alpha(book, cfg)
        power = PowerAllocation(
            power=alpha * rng.uniform(0.05, 0.6, (L, K)), alpha=alpha
        )
        return cfg, book, power

    return make
