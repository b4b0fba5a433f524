import math
from dataclasses import replace

import numpy as np
import pytest

from riscc import channel as ch
from riscc import scenario
from riscc.channel import (Path, RisPhaseConfig, SegmentChannel, array_response,
                           cascaded_gains, compose_pathsum, compose_product,
                           complex_normal, dirichlet_power, identity_phases,
                           sample_ris_rx, sample_tx_ris)


def test_array_response_trivial():
    assert array_response(1, 1.3) == pytest.approx([1.0])
    assert array_response(4, 0.0) == pytest.approx([0.5] * 4)


def test_array_response_dft_orthogonality():
    inner = array_response(16, 2 * np.pi / 16).conj() @ array_response(16, 4 * np.pi / 16)
    assert abs(inner) <= 1e-12


def test_array_response_unit_norm(rng):
    for _ in range(20):
        n = int(rng.integers(1, 300))
        theta = rng.uniform(-np.pi, np.pi)
        assert np.linalg.norm(array_response(n, theta)) == pytest.approx(1.0, abs=1e-12)


def test_array_response_entry_formula(rng):
    theta = rng.uniform(-np.pi, np.pi)
    a = array_response(5, theta)
    for m in range(5):
        assert a[m] == pytest.approx(np.exp(1j * m * theta) / np.sqrt(5), abs=1e-14)


def _segment_direct_matrix(segment):
    out = np.zeros((segment.n_out, segment.n_in), dtype=complex)
    for p in segment.paths:
        a_out = np.exp(1j * p.theta_arrival * np.arange(segment.n_out)) / math.sqrt(segment.n_out)
        a_in = np.exp(1j * p.theta_departure * np.arange(segment.n_in)) / math.sqrt(segment.n_in)
        out += p.gain * np.outer(a_out, a_in.conj())
    return out


def test_tx_ris_segment_structure(small_config, small_placements, rng):
    seg = sample_tx_ris(small_placements[0], small_config, rng)
    assert seg.kind == "tx-to-ris"
    assert len(seg.paths) == 1 + small_config.n_nlos_tx[0]
    assert seg.paths[0].is_los and seg.paths[0].beta is None
    assert all(not p.is_los for p in seg.paths[1:])
    assert seg.matrix.shape == (small_placements[0].n_elements, small_config.n_tx)
    rel = np.linalg.norm(seg.matrix - _segment_direct_matrix(seg))
    assert rel / np.linalg.norm(seg.matrix) <= 1e-12
    assert all(abs(p.theta_arrival) <= np.pi and abs(p.theta_departure) <= np.pi
               for p in seg.paths)


def test_ris_rx_segment_structure(small_config, small_placements, rng):
    seg = sample_ris_rx(small_placements[1], np.array([200.0, 0.0]), small_config, rng)
    assert seg.kind == "ris-to-rx"
    assert len(seg.paths) == small_config.n_paths_rx[1]
    assert seg.matrix.shape == (small_config.n_rx, small_placements[1].n_elements)


def test_los_gain_formula(small_config, small_placements, rng):
    seg = sample_tx_ris(small_placements[0], small_config, rng)
    kappa = small_config.rician_factor[0]
    n_s = small_placements[0].n_elements
    expected = math.sqrt(small_config.n_tx * n_s * kappa / (kappa + 1))
    assert seg.paths[0].gain == pytest.approx(expected, rel=1e-12)


def test_pure_los_limit(small_config, small_placements, rng):
    cfg = replace(small_config, rician_factor=1e12)
    seg = sample_tx_ris(small_placements[0], cfg, rng)
    n_s = small_placements[0].n_elements
    assert max(abs(p.gain) for p in seg.paths[1:]) <= 1e-3
    assert np.linalg.norm(seg.matrix) == pytest.approx(math.sqrt(cfg.n_tx * n_s), rel=1e-5)


def test_tx_ris_frobenius_normalization(small_config, small_placements):
    """Monte Carlo E||H||_F^2 vs n_tx * n_elements (unit-power model)."""
    rng = np.random.default_rng(42)
    p = small_placements[0]
    total = 0.0
    n = 10_000
    for _ in range(n):
        seg = sample_tx_ris(p, small_config, rng)
        total += np.linalg.norm(seg.matrix) ** 2
    assert total / n == pytest.approx(small_config.n_tx * p.n_elements, rel=0.02)


def test_ris_rx_frobenius_normalization(small_config, small_placements):
    rng = np.random.default_rng(43)
    p = small_placements[0]
    total = 0.0
    n = 10_000
    for _ in range(n):
        seg = sample_ris_rx(p, np.array([200.0, 0.0]), small_config, rng)
        total += np.linalg.norm(seg.matrix) ** 2
    assert total / n == pytest.approx(small_config.n_rx * p.n_elements, rel=0.02)


def test_single_rx_path_power(small_config, small_placements):
    cfg = replace(small_config, n_paths_rx=1)
    rng = np.random.default_rng(44)
    p = small_placements[0]
    sq = [abs(sample_ris_rx(p, np.array([200.0, 0.0]), cfg, rng).paths[0].gain) ** 2
          for _ in range(10_000)]
    assert np.mean(sq) == pytest.approx(cfg.n_rx * p.n_elements, rel=0.05)


def test_sampling_deterministic(small_config, small_placements):
    def draw(seed):
        rng = np.random.default_rng(seed)
        return sample_tx_ris(small_placements[0], small_config, rng).paths

    for a, b in zip(draw(11), draw(11)):
        assert a == b  # byte-identical path list


def test_complex_normal_moments():
    rng = np.random.default_rng(3)
    z = complex_normal(rng, 200_000)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, rel=0.01)
    assert abs(np.mean(z)) <= 0.01


def _single_path_pair(n_rx, n_s, n_tx, theta_r_arr, theta_r_dep, theta_t_arr,
                      theta_t_dep, gain_r, gain_t, k=0):
    tx = SegmentChannel(kind="tx-to-ris", ris_index=k,
                        paths=(Path(gain_t, None, theta_t_arr, theta_t_dep, True),),
                        n_out=n_s, n_in=n_tx)
    rx = SegmentChannel(kind="ris-to-rx", ris_index=k,
                        paths=(Path(gain_r, None, theta_r_arr, theta_r_dep),),
                        n_out=n_rx, n_in=n_s)
    return tx, rx


def test_compose_product_rank_one():
    gain_r, gain_t, rho = 2.0 + 1j, 1.5, 1e-4
    tx, rx = _single_path_pair(2, 32, 8, 0.4, 0.9, -0.3, 1.1, gain_r, gain_t)
    phases = RisPhaseConfig((np.zeros(32),))
    h = compose_product([tx], [rx], phases, [rho], 2, 8)
    assert np.linalg.matrix_rank(h) == 1
    inner = array_response(32, 0.9).conj() @ array_response(32, -0.3)
    expected = rho * abs(gain_r) * abs(gain_t) * abs(inner)
    assert np.linalg.norm(h) == pytest.approx(expected, rel=1e-10)


def test_compose_zero_path_loss(small_config, small_placements, rng):
    tx = [sample_tx_ris(p, small_config, rng) for p in small_placements]
    rx = [sample_ris_rx(p, np.array([200.0, 0.0]), small_config, rng)
          for p in small_placements]
    phases = identity_phases(small_placements)
    h = compose_product(tx, rx, phases, np.zeros(3), small_config.n_rx, small_config.n_tx)
    assert np.all(h == 0)


def test_compose_dimension_mismatch(small_config, small_placements, rng):
    tx = sample_tx_ris(small_placements[0], small_config, rng)
    rx = sample_ris_rx(small_placements[1], np.array([200.0, 0.0]), small_config, rng)
    if small_placements[0].n_elements != small_placements[1].n_elements:
        with pytest.raises(ValueError, match="mismatch"):
            compose_product([tx], [rx], identity_phases(small_placements[:1]), [1.0],
                            small_config.n_rx, small_config.n_tx)


def _random_realization(config, placements, seed, designed=False):
    rng = np.random.default_rng(seed)
    tx = [sample_tx_ris(p, config, rng) for p in placements]
    rx_pos = scenario.sample_rx_position(config, rng)
    rx = [sample_ris_rx(p, rx_pos, config, rng) for p in placements]
    losses = scenario.link_path_losses(placements, rx_pos, config.wavelength)
    if designed:
        omegas = tuple(np.arange(p.n_elements)
                       * (rx[i].paths[0].theta_departure - p.theta_tx_aoa)
                       for i, p in enumerate(placements))
        phases = RisPhaseConfig(omegas)
    else:
        phases = identity_phases(placements)
    return tx, rx, losses, phases


@pytest.mark.parametrize("designed", [False, True])
def test_dual_construction(small_config, small_placements, designed):
    for seed in range(10):
        tx, rx, losses, phases = _random_realization(small_config, small_placements,
                                                     seed, designed)
        h1 = compose_product(tx, rx, phases, losses, small_config.n_rx, small_config.n_tx)
        h2 = compose_pathsum(tx, rx, phases, losses, small_config.n_rx, small_config.n_tx)
        assert np.linalg.norm(h1 - h2) / np.linalg.norm(h1) <= 1e-10


def test_pathsum_empty_ris_list(small_config):
    h = compose_pathsum([], [], RisPhaseConfig(()), [], small_config.n_rx,
                        small_config.n_tx)
    assert h.shape == (small_config.n_rx, small_config.n_tx)
    assert np.all(h == 0)


def test_pathsum_asymptotic_orthogonality():
    """Undesigned large surface with distinct angles leaves ~no channel."""
    n_s = 4096
    gain_r, gain_t, rho = 1.0, 1.0, 1.0
    tx, rx = _single_path_pair(2, n_s, 8, 0.4, 0.9, -0.1, 1.1, gain_r, gain_t)
    phases = RisPhaseConfig((np.zeros(n_s),))
    h = compose_pathsum([tx], [rx], phases, [rho], 2, 8)
    assert np.linalg.norm(h) <= 1e-2 * rho * gain_r * gain_t


def test_cascaded_gains_direct_oracle(small_config, small_placements, rng):
    tx, rx, losses, _ = _random_realization(small_config, small_placements, 5)
    omegas = tuple(rng.uniform(-np.pi, np.pi, p.n_elements) for p in small_placements)
    phases = RisPhaseConfig(omegas)
    gains = cascaded_gains(tx, rx, phases, losses)
    for k in range(len(small_placements)):
        n_s = small_placements[k].n_elements
        gamma = np.diag(np.exp(1j * omegas[k]))
        for l, pr in enumerate(rx[k].paths):
            for j, pt in enumerate(tx[k].paths):
                a_d = array_response(n_s, pr.theta_departure)
                a_a = array_response(n_s, pt.theta_arrival)
                direct = losses[k] * pr.gain * pt.gain * (a_d.conj() @ gamma @ a_a)
                assert gains.per_ris[k][l, j] == pytest.approx(direct, abs=1e-12 * abs(direct) + 1e-15)


def test_cascaded_gain_identity_same_angle():
    tx, rx = _single_path_pair(2, 64, 8, 0.4, 0.7, 0.7, 1.1, 2.0, 3.0)
    gains = cascaded_gains([tx], [rx], RisPhaseConfig((np.zeros(64),)), [0.5])
    assert gains.per_ris[0][0, 0] == pytest.approx(0.5 * 2.0 * 3.0, rel=1e-12)


def test_cascaded_gain_designed_phase_maximal():
    theta_dep_rx, theta_arr_tx = 0.9, -0.3
    tx, rx = _single_path_pair(2, 64, 8, 0.4, theta_dep_rx, theta_arr_tx, 1.1,
                               2.0 - 1j, 3.0)
    omega = np.arange(64) * (theta_dep_rx - theta_arr_tx)
    gains = cascaded_gains([tx], [rx], RisPhaseConfig((omega,)), [0.5])
    assert abs(gains.per_ris[0][0, 0]) == pytest.approx(0.5 * abs(2.0 - 1j) * 3.0, rel=1e-12)


def test_block_diagonal_layout(small_config, small_placements):
    tx, rx, losses, phases = _random_realization(small_config, small_placements, 9)
    gains = cascaded_gains(tx, rx, phases, losses)
    blk = gains.block_diagonal()
    rows = sum(b.shape[0] for b in gains.per_ris)
    cols = sum(b.shape[1] for b in gains.per_ris)
    assert blk.shape == (rows, cols)
    assert gains.total_power() == pytest.approx(np.sum(np.abs(blk) ** 2), rel=1e-12)


def test_dirichlet_identity(rng):
    for _ in range(50):
        n = int(rng.integers(2, 513))
        t1 = rng.uniform(-np.pi, np.pi)
        t2 = rng.uniform(-np.pi, np.pi)
        inner = abs(array_response(n, t1).conj() @ array_response(n, t2)) ** 2
        assert abs(inner - dirichlet_power(t1 - t2, n)) <= 1e-10


def test_dirichlet_limits():
    assert dirichlet_power(0.0, 64) == pytest.approx(1.0)
    assert dirichlet_power(2 * np.pi, 64) == pytest.approx(1.0)
    assert dirichlet_power(2 * np.pi / 64, 64) == pytest.approx(0.0, abs=1e-25)


def test_phase_config_preserves_norm(rng):
    omega = rng.uniform(-np.pi, np.pi, 128)
    phases = RisPhaseConfig((omega,))
    x = complex_normal(rng, 128)
    assert np.linalg.norm(phases.factors(0) * x) == pytest.approx(np.linalg.norm(x), rel=1e-12)
