"""Channel-customization pipeline: pruning, orthogonal path selection,
RIS phase design and the SVD-form approximation of the composite channel."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from ._kernels import search_orthogonal_paths
from .channel import (RIS_TO_RX, CascadedGains, Path, RisPhaseConfig,
                      SegmentChannel, array_response, dirichlet_power)
from .scenario import ScenarioConfig


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Outcome of the exhaustive orthogonal-path search.

    ``chosen_rx_path[i]`` indexes into the path list of the segment for RIS
    ``active_ris[i]`` *as given to select_paths* (use
    :func:`remap_rx_indices` after pruning to recover indices into the
    unpruned segments); ``chosen_paths`` holds the Path objects themselves.
    """

    active_ris: tuple          # N_R RIS indices, ascending
    chosen_rx_path: tuple      # one path index per active RIS
    chosen_paths: tuple        # the corresponding Path objects
    a_r_orth: np.ndarray       # N_R x N_R, Rx responses of the chosen paths
    a_t_orth: np.ndarray       # N_T x N_R, Tx LoS responses of the active RISs
    xi_star: np.ndarray        # complex per active RIS (designed-phase gains)
    objective: float           # ||A^H A - I||_F^2 of a_r_orth


def prune_paths(segment: SegmentChannel, threshold_db: float) -> SegmentChannel:
    """Drop paths more than ``threshold_db`` below the strongest one.

    A path survives iff |gain| >= max|gain| * 10^(-threshold_db/20); the
    strongest path always survives.
    """
    if segment.kind != RIS_TO_RX:
        raise ValueError("path pruning applies to ris-to-rx segments")
    amps = np.abs(segment.gains())
    floor = amps.max() * 10.0 ** (-threshold_db / 20.0)
    keep = amps >= floor
    keep[int(np.argmax(amps))] = True
    survivors = tuple(p for p, k in zip(segment.paths, keep) if k)
    return replace(segment, paths=survivors)


def enumeration_count(n_ris: int, n_select: int, path_counts) -> int:
    """Size of the exhaustive search space: sum over RIS subsets of the
    product of their per-RIS path counts."""
    if n_ris < n_select:
        raise ValueError(f"need n_ris >= n_select, got {n_ris} < {n_select}")
    if len(path_counts) != n_ris:
        raise ValueError("path_counts must have one entry per RIS")
    return sum(math.prod(path_counts[k] for k in subset)
               for subset in combinations(range(n_ris), n_select))


def select_paths(rx_segments, placements, config: ScenarioConfig,
                 path_losses) -> SelectionResult:
    """Exhaustively pick N_R RISs and one rx path each to minimize
    ||A^H A - I||_F^2 over the chosen Rx array responses.

    Ties break lexicographically on (RIS subset, path indices).  The Tx-side
    factor always takes the LoS departure responses of the active RISs, which
    are exactly DFT-orthogonal under the deployment rule.
    """
    n_ris = len(rx_segments)
    n_sel = config.n_rx
    if n_ris < n_sel:
        raise ValueError(f"infeasible selection: {n_ris} RISs < {n_sel} streams")
    counts = [len(s.paths) for s in rx_segments]
    if any(c < 1 for c in counts):
        raise ValueError("every RIS needs at least one surviving path")

    thetas = np.concatenate([s.arrival_thetas() for s in rx_segments])
    offsets = np.zeros(n_ris + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts)
    pair_pow = dirichlet_power(thetas[:, None] - thetas[None, :], config.n_rx)
    subsets = np.array(list(combinations(range(n_ris), n_sel)), dtype=np.int64)

    objective, sub_idx, local = search_orthogonal_paths(
        np.ascontiguousarray(pair_pow, dtype=np.float64), offsets, subsets)

    active = tuple(int(k) for k in subsets[sub_idx])
    chosen_idx = tuple(int(i) for i in local)
    chosen = tuple(rx_segments[k].paths[i] for k, i in zip(active, chosen_idx))

    a_r = np.stack([array_response(config.n_rx, p.theta_arrival) for p in chosen], axis=1)
    a_t = np.stack([array_response(config.n_tx, placements[k].theta_tx_aod)
                    for k in active], axis=1)
    xi_star = np.empty(n_sel, dtype=complex)
    for i, (k, p) in enumerate(zip(active, chosen)):
        kappa = config.rician_factor[k]
        los_gain = math.sqrt(config.n_tx * placements[k].n_elements * kappa / (kappa + 1.0))
        xi_star[i] = path_losses[k] * p.gain * los_gain
    return SelectionResult(active_ris=active, chosen_rx_path=chosen_idx,
                           chosen_paths=chosen, a_r_orth=a_r, a_t_orth=a_t,
                           xi_star=xi_star, objective=float(objective))


def remap_rx_indices(selection: SelectionResult, rx_segments) -> SelectionResult:
    """Re-express chosen_rx_path as indices into ``rx_segments`` (identity
    lookup of the chosen Path objects, e.g. pruned -> unpruned)."""
    new_idx = []
    for k, path in zip(selection.active_ris, selection.chosen_paths):
        paths = rx_segments[k].paths
        idx = next((i for i, p in enumerate(paths) if p is path), None)
        if idx is None:
            raise ValueError(f"chosen path of RIS {k} not found in the given segments")
        new_idx.append(idx)
    return replace(selection, chosen_rx_path=tuple(new_idx))


def design_phases(selection: SelectionResult, placements,
                  quantized=None) -> RisPhaseConfig:
    """Linear phase profiles enhancing the selected cascaded paths.

    Active RIS k gets omega_n = n * (theta_D - theta^A_{T,k,0}) for
    n = 0..N_S-1, where theta_D is the chosen rx-path departure parameter
    or its quantized value from ``quantized`` (a {ris_index: theta} map).
    Inactive RISs stay undesigned (all-zero profile).
    """
    quantized = quantized or {}
    target = {}
    for k, path in zip(selection.active_ris, selection.chosen_paths):
        target[k] = quantized.get(k, path.theta_departure)
    omegas = []
    for p in placements:
        if p.index in target:
            phi = target[p.index] - p.theta_tx_aoa
            omegas.append(np.arange(p.n_elements) * phi)
        else:
            omegas.append(np.zeros(p.n_elements))
    return RisPhaseConfig(tuple(omegas))


def customized_approx(selection: SelectionResult) -> np.ndarray:
    """SVD-form channel approximation A_{R,orth} diag(xi*) A_{T,orth}^H."""
    return (selection.a_r_orth * selection.xi_star[None, :]) @ selection.a_t_orth.conj().T


def orthogonal_power_ratio(gains: CascadedGains, selection: SelectionResult) -> float:
    """Power in the selected cascaded paths over the power in all of them.

    ``selection.chosen_rx_path`` must index the same segments that produced
    ``gains`` (remap after pruning).
    """
    denom = gains.total_power()
    if denom == 0.0:
        raise ValueError("total cascaded path power is zero")
    num = sum(float(np.abs(gains.per_ris[k][l, 0]) ** 2)
              for k, l in zip(selection.active_ris, selection.chosen_rx_path))
    return num / denom
