"""SVD benchmark transceiver, channel-customization transceiver, power
allocation and spectral efficiency."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .customization import SelectionResult

# Streams whose lambda/noise falls below this are never activated.
_MIN_CHANNEL_TO_NOISE = 1e-15

WATERFILLING = "waterfilling"
EQUAL = "equal"


@dataclass(frozen=True, eq=False)
class SvdFactors:
    u: np.ndarray                 # N_R x N_R unitary
    singular_values: np.ndarray   # squared singular values, descending
    v: np.ndarray                 # N_T x N_R, orthonormal columns


@dataclass(frozen=True, eq=False)
class Transceiver:
    precoder: np.ndarray          # N_T x N_R
    combiner: np.ndarray          # N_R x N_R
    power_alloc: np.ndarray       # watts per stream
    water_level: float | None = None  # absent under equal allocation


def svd_factors(h: np.ndarray) -> SvdFactors:
    """Thin SVD of a wide channel matrix with descending singular values."""
    h = np.asarray(h)
    if h.shape[0] >= h.shape[1]:
        raise ValueError("expected a wide channel matrix (n_tx > n_rx)")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel matrix contains non-finite entries")
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    return SvdFactors(u=u, singular_values=s ** 2, v=vh.conj().T)


def water_filling(channel_gains, total_power: float, noise_power: float):
    """Closed-form water-filling over squared singular values.

    Returns (p, mu) with p_i = max(0, mu - noise/lambda_i) and sum(p) equal
    to the power budget; every active stream satisfies the KKT condition
    exactly.  The water level is found by scanning active-set sizes on the
    sorted inverse gains, not by iterative bisection.
    """
    lam = np.asarray(channel_gains, dtype=float)
    if total_power <= 0 or noise_power <= 0:
        raise ValueError("total_power and noise_power must be strictly positive")
    if np.any(lam < 0):
        raise ValueError("channel gains must be nonnegative")
    usable = lam / noise_power >= _MIN_CHANNEL_TO_NOISE
    if not np.any(usable):
        raise ValueError("no feasible allocation: all channel gains are zero")
    inv = np.full(lam.shape, np.inf)
    inv[usable] = noise_power / lam[usable]
    order = np.argsort(inv, kind="stable")
    inv_sorted = inv[order]
    n_usable = int(np.count_nonzero(usable))
    mu = None
    for m in range(n_usable, 0, -1):
        candidate = (total_power + inv_sorted[:m].sum()) / m
        if candidate > inv_sorted[m - 1]:
            mu = candidate
            break
    p = np.maximum(0.0, mu - inv)
    return p, float(mu)


def equal_power(total_power: float, n_active: int) -> np.ndarray:
    if n_active < 1:
        raise ValueError("need at least one active stream")
    return np.full(n_active, total_power / n_active)


def _allocate(channel_gains, total_power, noise_power, allocation):
    if allocation == WATERFILLING:
        return water_filling(channel_gains, total_power, noise_power)
    if allocation == EQUAL:
        return equal_power(total_power, len(channel_gains)), None
    raise ValueError(f"unknown allocation mode {allocation!r}")


def svd_transceiver(h: np.ndarray, total_power: float, noise_power: float,
                    allocation: str = WATERFILLING) -> Transceiver:
    """Benchmark transceiver from full CSI: F = V P^(1/2), W = U."""
    factors = svd_factors(h)
    p, mu = _allocate(factors.singular_values, total_power, noise_power, allocation)
    return Transceiver(precoder=factors.v * np.sqrt(p)[None, :],
                       combiner=factors.u, power_alloc=p, water_level=mu)


def cc_transceiver(selection: SelectionResult, total_power: float,
                   noise_power: float, allocation: str = WATERFILLING) -> Transceiver:
    """Customization transceiver from limited CSI, no matrix decomposition:
    F = A_{T,orth} P^(1/2), W = A_{R,orth}, powers from |xi*|^2."""
    gains = np.abs(selection.xi_star) ** 2
    p, mu = _allocate(gains, total_power, noise_power, allocation)
    return Transceiver(precoder=selection.a_t_orth * np.sqrt(p)[None, :],
                       combiner=selection.a_r_orth, power_alloc=p, water_level=mu)


def whiten_combiner(w: np.ndarray) -> np.ndarray:
    """Orthonormalize combiner columns by thin QR (nonnegative R diagonal).

    Keeps the combined noise white in the spectral-efficiency evaluation;
    the feedback analysis keeps using the raw columns.
    """
    q, r = np.linalg.qr(w)
    d = np.diag(r)
    safe = np.where(np.abs(d) > 0, d, 1.0)
    phase = safe / np.abs(safe)
    return q * phase[None, :]


def spectral_efficiency(h: np.ndarray, precoder: np.ndarray, combiner: np.ndarray,
                        noise_power: float, require_orthonormal: bool = True) -> float:
    """Downlink spectral efficiency log2 det(I + W^H H F F^H H^H W / noise).

    The formula treats the combined noise as white, which requires
    orthonormal combiner columns; violations beyond 1e-8 raise unless
    ``require_orthonormal`` is disabled for side-by-side comparisons.
    """
    w = np.asarray(combiner)
    gram = w.conj().T @ w
    dev = np.max(np.abs(gram - np.eye(w.shape[1])))
    if require_orthonormal and dev > 1e-8:
        raise ValueError(f"combiner columns are not orthonormal (deviation {dev:.2e})")
    m = w.conj().T @ np.asarray(h) @ np.asarray(precoder)
    g = np.eye(m.shape[0], dtype=complex) + m @ m.conj().T / noise_power
    _, logdet = np.linalg.slogdet(g)
    return float(logdet / math.log(2.0))


def r_pl_closed_form(xi_star, power_alloc, noise_power: float) -> float:
    """Residual-free spectral efficiency sum_k log2(1 + |xi*_k|^2 p_k / noise)."""
    xi = np.asarray(xi_star)
    p = np.asarray(power_alloc, dtype=float)
    return float(np.sum(np.log2(1.0 + np.abs(xi) ** 2 * p / noise_power)))
