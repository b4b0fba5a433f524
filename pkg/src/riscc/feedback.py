"""Directional-parameter quantization under a bit budget, closed-form
SE-loss machinery and greedy bit partitioning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel, customization, scenario, transceiver
from .scenario import RisPlacement, ScenarioConfig

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuantizationPlan:
    """Per-stream feedback bits split into a minimum part plus extra bits."""

    total_bits: int
    min_bits: tuple    # b_min per stream
    extra_bits: tuple  # nonnegative extras per stream

    def __post_init__(self):
        object.__setattr__(self, "min_bits", tuple(int(b) for b in self.min_bits))
        object.__setattr__(self, "extra_bits", tuple(int(x) for x in self.extra_bits))
        if len(self.min_bits) != len(self.extra_bits):
            raise ValueError("min_bits and extra_bits must have the same length")
        if any(b < 0 for b in self.min_bits) or any(x < 0 for x in self.extra_bits):
            raise ValueError("bit counts must be nonnegative")
        if sum(self.min_bits) + sum(self.extra_bits) != self.total_bits:
            raise ValueError("per-stream bits must sum to total_bits")

    @property
    def bits(self) -> tuple:
        return tuple(b + x for b, x in zip(self.min_bits, self.extra_bits))


@dataclass(frozen=True)
class LinkQuality:
    """Average per-stream link quality C-bar (dimensionless, > 0)."""

    c_bar: tuple

    def __post_init__(self):
        object.__setattr__(self, "c_bar", tuple(float(c) for c in self.c_bar))
        if any(c <= 0 for c in self.c_bar):
            raise ValueError("link qualities must be strictly positive")


def min_bits(n_elements: int) -> int:
    """Fewest bits keeping the worst quantization error inside the first
    beam null: ceil(log2(N_S/2)), floored at zero."""
    if n_elements < 1:
        raise ValueError("element count must be >= 1")
    return max(0, (int(n_elements) - 1).bit_length() - 1)


def quantize_direction(theta, bits: int):
    """Nearest codeword of the midpoint-uniform codebook on [-pi, pi).

    Codewords are -pi + 2*pi*(i + 1/2)/2^bits; boundary ties resolve toward
    the smaller codeword.  The error never exceeds 2*pi/2^(bits+1).
    """
    if bits < 0:
        raise ValueError("bit count must be >= 0")
    levels = 1 << bits
    step = TWO_PI / levels
    theta_arr = np.asarray(theta, dtype=float)
    u = (theta_arr + math.pi) / step
    idx = np.floor(u)
    idx = np.where((u == idx) & (idx > 0), idx - 1, idx)  # tie toward smaller codeword
    idx = np.clip(idx, 0, levels - 1)
    out = -math.pi + step * (idx + 0.5)
    if np.isscalar(theta) or theta_arr.ndim == 0:
        return float(out)
    return out


def c_bar_closed_form(config: ScenarioConfig, placement: RisPlacement,
                      d_rx: float) -> float:
    """Average link quality E/(N_R*noise) * xi0 * (d_ref/d_rx)^2.

    The squared factor applies to the distance ratio only; the squared-gain
    target enters to the first power.
    """
    if d_rx <= 0:
        raise ValueError("d_rx must be strictly positive")
    ratio = placement.d_ref / d_rx
    return config.transmit_power / (config.n_rx * config.noise_power) * config.xi0 * ratio ** 2


def sample_c_k(xi_star, total_power: float, noise_power: float) -> np.ndarray:
    """Instantaneous link quality per stream from one draw of the
    customized singular values (all streams assumed active):

    C_k = |xi_k|^2 (E/(N_R s^2) + sum_i 1/(N_R |xi_i|^2) - 1/|xi_k|^2).
    """
    xi = np.asarray(xi_star)
    a2 = np.abs(xi) ** 2
    if np.any(a2 == 0):
        raise ValueError("degenerate draw: some singular values are zero")
    n = xi.shape[-1]
    harm = np.sum(1.0 / (n * a2), axis=-1, keepdims=True)
    return a2 * (total_power / (n * noise_power) + harm - 1.0 / a2)


def se_loss_approx(c_bar, extra_bits) -> float:
    """Closed-form SE loss sum_k log2((1+C_k)/(1+C_k(1-2^(-1-x_k))))."""
    c = np.asarray(c_bar, dtype=float)
    x = np.asarray(extra_bits, dtype=float)
    if c.shape != x.shape:
        raise ValueError("c_bar and extra_bits lengths differ")
    return float(np.sum(np.log2((1.0 + c) / (1.0 + c * (1.0 - 2.0 ** (-1.0 - x))))))


def se_loss_upper(extra_bits) -> float:
    """Link-quality-independent bound sum_k log2(1/(1-2^(-1-x_k)))."""
    x = np.asarray(extra_bits, dtype=float)
    return float(np.sum(np.log2(1.0 / (1.0 - 2.0 ** (-1.0 - x)))))


def se_increase(c_bar: float, extra_bits: int) -> float:
    """SE gained by one more bit on a stream currently holding x extra bits:
    log2(1 + 1/(2^(2+x)(1/C+1) - 2))."""
    return math.log2(1.0 + 1.0 / (2.0 ** (2 + extra_bits) * (1.0 / c_bar + 1.0) - 2.0))


def greedy_partition(c_bar, extra_total: int) -> np.ndarray:
    """Assign extra bits one at a time to the stream with the smallest
    x_k + log2(1/C_k + 1) (ties to the lowest stream index).

    The per-bit SE increase is a strictly decreasing function of that
    criterion, so the greedy result attains the exhaustive optimum.
    """
    c = np.asarray(c_bar, dtype=float)
    if extra_total < 0:
        raise ValueError("extra bit budget must be >= 0")
    x = np.zeros(len(c), dtype=int)
    penalty = np.log2(1.0 / c + 1.0)
    for _ in range(extra_total):
        x[int(np.argmin(x + penalty))] += 1
    return x


def _partition_objective(c, x):
    return float(np.sum(np.log2(1.0 + c * (1.0 - 2.0 ** (-1.0 - np.asarray(x, float))))))


def _compositions(total, n):
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


def exhaustive_partition(c_bar, extra_total: int) -> np.ndarray:
    """Globally optimal extra-bit split by full enumeration (test oracle)."""
    c = np.asarray(c_bar, dtype=float)
    n = len(c)
    if n ** extra_total > 10 ** 7:
        raise ValueError("exhaustive partition guard exceeded: "
                         f"{n}^{extra_total} > 1e7 candidates")
    best = None
    best_val = -np.inf
    for x in _compositions(extra_total, n):
        val = _partition_objective(c, x)
        if val > best_val:
            best_val = val
            best = x
    return np.array(best, dtype=int)


def quantized_directions(selection: customization.SelectionResult,
                         plan: QuantizationPlan, placements) -> dict:
    """Quantize the fed-back departure parameters of the chosen rx paths.

    Stream i maps to the i-th active RIS (ascending index); the plan's
    per-stream minimum bits must match the RIS sizes under that mapping.
    Returns {ris_index: quantized theta}.
    """
    if len(plan.min_bits) != len(selection.active_ris):
        raise ValueError("plan stream count does not match the active set")
    out = {}
    for i, (k, path) in enumerate(zip(selection.active_ris, selection.chosen_paths)):
        required = min_bits(placements[k].n_elements)
        if plan.min_bits[i] != required:
            raise ValueError(f"plan min_bits[{i}]={plan.min_bits[i]} inconsistent with "
                             f"RIS {k} (needs {required})")
        out[k] = quantize_direction(path.theta_departure, plan.bits[i])
    return out


def plan_for_sizes(n_elements, extra_bits) -> QuantizationPlan:
    """Build a plan from per-stream RIS sizes and an extra-bit vector."""
    mins = tuple(min_bits(n) for n in n_elements)
    extras = tuple(int(x) for x in extra_bits)
    return QuantizationPlan(total_bits=sum(mins) + sum(extras),
                            min_bits=mins, extra_bits=extras)


def equal_extra_bits(n_streams: int, extra_total: int) -> tuple:
    """Equal split of the extra budget; the remainder goes to the first
    streams (the high-link-quality limit of the greedy rule)."""
    base, rem = divmod(extra_total, n_streams)
    return tuple(base + (1 if i < rem else 0) for i in range(n_streams))


def ergodic_se_loss_mc(config: ScenarioConfig, plan: QuantizationPlan,
                       n_trials: int, seed, recompute_power: bool = False):
    """Monte Carlo ergodic SE loss of quantized feedback through the full
    pipeline.

    Each trial runs pruning, selection and phase design twice (exact and
    quantized directions), evaluates the log-det spectral efficiency on
    both composite channels with the same transceiver, and averages the
    difference.  Water-filling powers from the perfect singular values are
    reused for the quantized pass unless ``recompute_power`` is set, in
    which case the allocation is redone on the quantization-shrunken gains.

    Returns (mean_loss, standard_error).
    """
    placements = scenario.place_ris(config)
    seed_tuple = (seed,) if np.isscalar(seed) else tuple(seed)
    losses = np.empty(n_trials)
    for t in range(n_trials):
        rng = np.random.default_rng([*seed_tuple, t])
        trial = _sample_selection(config, placements, rng)
        losses[t] = _trial_se_loss(config, placements, trial, plan, recompute_power)
    stderr = float(losses.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    return float(losses.mean()), stderr


def _sample_selection(config, placements, rng):
    """One channel realization with pruning and path selection applied."""
    rx_position = scenario.sample_rx_position(config, rng)
    tx_segments = [channel.sample_tx_ris(p, config, rng) for p in placements]
    rx_segments = [channel.sample_ris_rx(p, rx_position, config, rng) for p in placements]
    path_losses = scenario.link_path_losses(placements, rx_position, config.wavelength)
    pruned = [customization.prune_paths(s, config.prune_threshold_db) for s in rx_segments]
    selection = customization.select_paths(pruned, placements, config, path_losses)
    selection = customization.remap_rx_indices(selection, rx_segments)
    return tx_segments, rx_segments, path_losses, selection


def _trial_se_loss(config, placements, trial, plan, recompute_power):
    tx_segments, rx_segments, path_losses, selection = trial
    theta_q = quantized_directions(selection, plan, placements)
    exact = customization.design_phases(selection, placements)
    quantized = customization.design_phases(selection, placements, theta_q)
    h_exact = channel.compose_product(tx_segments, rx_segments, exact, path_losses,
                                      config.n_rx, config.n_tx)
    h_quant = channel.compose_product(tx_segments, rx_segments, quantized, path_losses,
                                      config.n_rx, config.n_tx)
    trx = transceiver.cc_transceiver(selection, config.transmit_power, config.noise_power)
    w = transceiver.whiten_combiner(trx.combiner)
    se_exact = transceiver.spectral_efficiency(h_exact, trx.precoder, w, config.noise_power)
    if recompute_power:
        # redo the allocation on the quantization-shrunken singular values
        shrink = np.array([channel.dirichlet_power(path.theta_departure - theta_q[k],
                                                   placements[k].n_elements)
                           for k, path in zip(selection.active_ris, selection.chosen_paths)])
        gains = np.abs(selection.xi_star) ** 2 * shrink
        p, _ = transceiver.water_filling(gains, config.transmit_power, config.noise_power)
        precoder = selection.a_t_orth * np.sqrt(p)[None, :]
    else:
        precoder = trx.precoder
    se_quant = transceiver.spectral_efficiency(h_quant, precoder, w, config.noise_power)
    return se_exact - se_quant
