import numpy as np
import pytest

import riscc
from riscc.scenario import ScenarioConfig


@pytest.fixture(scope="session")
def paper_config():
    return riscc.paper_default()


@pytest.fixture(scope="session")
def paper_placements(paper_config):
    return riscc.place_ris(paper_config)


@pytest.fixture(scope="session")
def small_config():
    """Cheap scenario (tiny RIS sizes) for statistical and pipeline tests."""
    return ScenarioConfig(
        carrier_frequency=3.5e9,
        n_tx=8,
        n_rx=2,
        n_ris=3,
        tx_position=(0.0, 0.0),
        ris_plane_x=150.0,
        dft_offset=0.0,
        dft_indices=(1, 7, 2),
        blind_area_center=(200.0, 0.0),
        blind_area_radius=50.0,
        rician_factor=10.0,
        n_nlos_tx=2,
        n_paths_rx=4,
        prune_threshold_db=10.0,
        noise_power=1e-13,
        transmit_power=1.0,
        xi0=3e-13,
        feedback_budget=16,
        rng_seed=1234,
        name="small",
    )


@pytest.fixture(scope="session")
def small_placements(small_config):
    return riscc.place_ris(small_config)


@pytest.fixture()
def rng():
    return np.random.default_rng(2026)
