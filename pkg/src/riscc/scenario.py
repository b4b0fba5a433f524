"""System geometry and configuration: Tx/RIS/Rx placement, path loss, RIS sizing.

Units are linear and SI everywhere inside the library (watts, meters,
radians, linear Rician factors).  Scenario *files* use dB/dBm for the
fields suffixed ``_db``/``_dbm`` and are converted on load; see
:func:`load_scenario` for the schema.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

# Engineering convention (f_c in the GHz range, half-wavelength arrays).
SPEED_OF_LIGHT = 3.0e8  # m/s

TWO_PI = 2.0 * math.pi


class ScenarioError(ValueError):
    """Invalid scenario configuration or geometry."""


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 1e-3 * 10.0 ** (value_dbm / 10.0)


def watts_to_dbm(value_w: float) -> float:
    return 10.0 * math.log10(value_w / 1e-3)


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (theta + math.pi) % TWO_PI - math.pi


def _per_ris(value, n_ris: int, name: str) -> tuple:
    """Normalize a scalar or length-K sequence to a length-K tuple."""
    if np.isscalar(value):
        return (value,) * n_ris
    out = tuple(value)
    if len(out) != n_ris:
        raise ScenarioError(f"{name} must be a scalar or have one entry per RIS "
                            f"({n_ris}), got {len(out)}")
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    """Full system parameterization.

    Geometry is 2-D (top view); the Tx, RISs and Rx carry half-wavelength
    ULAs whose axes are parallel to the y-axis, so a directional parameter
    of 0 points along +x.
    """

    carrier_frequency: float          # Hz
    n_tx: int                         # Tx antennas
    n_rx: int                         # Rx antennas
    n_ris: int                        # number of surfaces
    tx_position: tuple                # (x, y) meters
    ris_plane_x: float                # meters; RISs sit on this vertical plane
    dft_offset: float                 # radians in [0, 2*pi]
    dft_indices: tuple                # one DFT-grid index per RIS
    blind_area_center: tuple          # (x, y) meters
    blind_area_radius: float          # meters
    rician_factor: tuple              # linear, per RIS
    n_nlos_tx: tuple                  # NLoS path count of each Tx-RIS link
    n_paths_rx: tuple                 # path count of each RIS-Rx link
    prune_threshold_db: float         # amplitude-ratio pruning threshold
    noise_power: float                # W
    transmit_power: float             # W
    xi0: float                        # squared cascaded-gain target
    feedback_budget: int              # total feedback bits
    rng_seed: int
    name: str = "unnamed"

    def __post_init__(self):
        k = int(self.n_ris)
        object.__setattr__(self, "tx_position", tuple(float(v) for v in self.tx_position))
        object.__setattr__(self, "blind_area_center",
                           tuple(float(v) for v in self.blind_area_center))
        object.__setattr__(self, "dft_indices",
                           tuple(int(v) for v in _per_ris(self.dft_indices, k, "dft_indices")))
        object.__setattr__(self, "rician_factor",
                           tuple(float(v) for v in _per_ris(self.rician_factor, k, "rician_factor")))
        object.__setattr__(self, "n_nlos_tx",
                           tuple(int(v) for v in _per_ris(self.n_nlos_tx, k, "n_nlos_tx")))
        object.__setattr__(self, "n_paths_rx",
                           tuple(int(v) for v in _per_ris(self.n_paths_rx, k, "n_paths_rx")))
        self._validate()

    def _validate(self):
        if not self.n_tx > self.n_rx >= 1:
            raise ScenarioError(f"need n_tx > n_rx >= 1, got n_tx={self.n_tx} n_rx={self.n_rx}")
        if self.n_ris < self.n_rx:
            raise ScenarioError(f"need n_ris >= n_rx, got n_ris={self.n_ris} n_rx={self.n_rx}")
        if len(set(self.dft_indices)) != self.n_ris:
            raise ScenarioError(f"dft_indices must be pairwise distinct, got {self.dft_indices}")
        if not 0.0 <= self.dft_offset <= TWO_PI:
            raise ScenarioError(f"dft_offset must lie in [0, 2*pi], got {self.dft_offset}")
        for field_name in ("carrier_frequency", "blind_area_radius", "noise_power",
                           "transmit_power", "xi0"):
            if not getattr(self, field_name) > 0:
                raise ScenarioError(f"{field_name} must be strictly positive")
        if any(kappa <= 0 for kappa in self.rician_factor):
            raise ScenarioError("rician_factor entries must be strictly positive (linear scale)")
        if any(l < 0 for l in self.n_nlos_tx):
            raise ScenarioError("n_nlos_tx entries must be >= 0")
        if any(l < 1 for l in self.n_paths_rx):
            raise ScenarioError("n_paths_rx entries must be >= 1")
        if self.prune_threshold_db < 0:
            raise ScenarioError("prune_threshold_db must be >= 0")
        if self.feedback_budget < 0:
            raise ScenarioError("feedback_budget must be >= 0")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency


@dataclass(frozen=True)
class RisPlacement:
    """One RIS resolved onto its DFT ray, with distances and size filled in."""

    index: int
    position: tuple          # (x, y) meters, x == ris_plane_x
    d_tx: float              # meters, Tx to RIS
    d_ref: float             # meters, RIS to blind-area center
    n_elements: int
    theta_tx_aod: float      # departure directional parameter at the Tx
    theta_tx_aoa: float      # arrival directional parameter at the RIS


def path_loss(d_tx: float, d_rx: float, wavelength: float) -> float:
    """Two-segment free-space amplitude product (lambda/4*pi*d) per hop."""
    if d_tx <= 0 or d_rx <= 0 or wavelength <= 0:
        raise ValueError("path_loss arguments must be strictly positive")
    return (wavelength / (4.0 * math.pi * d_tx)) * (wavelength / (4.0 * math.pi * d_rx))


def _ris_elements(d_tx: float, d_ref: float, kappa: float, n_paths_rx: int,
                  config: ScenarioConfig) -> int:
    base = 16.0 * math.pi ** 2 * d_tx * d_ref / config.wavelength ** 2
    factor = math.sqrt((kappa + 1.0) * n_paths_rx * config.xi0
                       / (kappa * config.n_tx * config.n_rx))
    return int(math.ceil(base * factor))


def ris_size(placement: RisPlacement, config: ScenarioConfig) -> int:
    """Element count that equalizes the expected squared reference gain to xi0.

    Only the geometry fields of ``placement`` are used, so the function can
    size a placement whose ``n_elements`` is not yet final.
    """
    k = placement.index
    return _ris_elements(placement.d_tx, placement.d_ref,
                         config.rician_factor[k], config.n_paths_rx[k], config)


def place_ris(config: ScenarioConfig) -> list:
    """Resolve every RIS onto its DFT ray from the Tx at x = ris_plane_x.

    The departure directional parameter of RIS k is 2*pi*n_k/n_tx + dft_offset
    (wrapped to [-pi, pi)); distinct indices give exactly DFT-orthogonal Tx
    array responses.
    """
    tx_x, tx_y = config.tx_position
    if config.ris_plane_x <= tx_x:
        raise ScenarioError("ris_plane_x must lie beyond the Tx x-coordinate")
    placements = []
    for k, n in enumerate(config.dft_indices):
        theta = wrap_angle(TWO_PI * n / config.n_tx + config.dft_offset)
        c = theta / math.pi  # cos of the physical departure angle from the array axis
        if abs(c) >= 1.0 - 1e-12:
            raise ScenarioError(f"dft index {n} (RIS {k}) points along the array axis "
                                "and never intersects the RIS plane")
        y = tx_y + (config.ris_plane_x - tx_x) * c / math.sqrt(1.0 - c * c)
        position = (config.ris_plane_x, y)
        d_tx = math.hypot(position[0] - tx_x, position[1] - tx_y)
        d_ref = math.hypot(position[0] - config.blind_area_center[0],
                           position[1] - config.blind_area_center[1])
        theta_aoa = math.pi * (tx_y - y) / d_tx  # unit vector toward the Tx, y-component
        n_elements = _ris_elements(d_tx, d_ref, config.rician_factor[k],
                                   config.n_paths_rx[k], config)
        placements.append(RisPlacement(index=k, position=position, d_tx=d_tx,
                                       d_ref=d_ref, n_elements=n_elements,
                                       theta_tx_aod=theta, theta_tx_aoa=theta_aoa))
    return placements


def sample_rx_position(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw on the blind-coverage disk."""
    radius = config.blind_area_radius * math.sqrt(rng.uniform())
    angle = rng.uniform(0.0, TWO_PI)
    center = np.asarray(config.blind_area_center, dtype=float)
    return center + radius * np.array([math.cos(angle), math.sin(angle)])


def link_path_losses(placements, rx_position, wavelength: float) -> np.ndarray:
    """Per-RIS cascaded path loss for a receiver at ``rx_position``."""
    rx = np.asarray(rx_position, dtype=float)
    out = np.empty(len(placements))
    for i, p in enumerate(placements):
        d_rx = math.hypot(rx[0] - p.position[0], rx[1] - p.position[1])
        out[i] = path_loss(p.d_tx, d_rx, wavelength)
    return out


# ---------------------------------------------------------------------------
# scenario files

_FILE_KEYS = {
    "name", "carrier_frequency_hz", "n_tx", "n_rx", "n_ris", "tx_position",
    "ris_plane_x", "dft_offset", "dft_indices", "blind_area_center",
    "blind_area_radius", "rician_factor_db", "n_nlos_tx", "n_paths_rx",
    "prune_threshold_db", "noise_power_dbm", "transmit_power_dbm", "xi0",
    "feedback_budget_bits", "rng_seed",
}


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    unknown = set(raw) - _FILE_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    missing = _FILE_KEYS - set(raw) - {"name"}
    if missing:
        raise ScenarioError(f"missing scenario keys: {sorted(missing)}")
    kappa = raw["rician_factor_db"]
    kappa_lin = ([db_to_linear(v) for v in kappa] if not np.isscalar(kappa)
                 else db_to_linear(kappa))
    return ScenarioConfig(
        carrier_frequency=float(raw["carrier_frequency_hz"]),
        n_tx=int(raw["n_tx"]),
        n_rx=int(raw["n_rx"]),
        n_ris=int(raw["n_ris"]),
        tx_position=tuple(raw["tx_position"]),
        ris_plane_x=float(raw["ris_plane_x"]),
        dft_offset=float(raw["dft_offset"]),
        dft_indices=raw["dft_indices"],
        blind_area_center=tuple(raw["blind_area_center"]),
        blind_area_radius=float(raw["blind_area_radius"]),
        rician_factor=kappa_lin,
        n_nlos_tx=raw["n_nlos_tx"],
        n_paths_rx=raw["n_paths_rx"],
        prune_threshold_db=float(raw["prune_threshold_db"]),
        noise_power=dbm_to_watts(float(raw["noise_power_dbm"])),
        transmit_power=dbm_to_watts(float(raw["transmit_power_dbm"])),
        xi0=float(raw["xi0"]),
        feedback_budget=int(raw["feedback_budget_bits"]),
        rng_seed=int(raw["rng_seed"]),
        name=str(raw.get("name", "unnamed")),
    )


def scenario_to_dict(config: ScenarioConfig) -> dict:
    """Inverse of :func:`scenario_from_dict` (dB/dBm file units)."""
    return {
        "name": config.name,
        "carrier_frequency_hz": config.carrier_frequency,
        "n_tx": config.n_tx,
        "n_rx": config.n_rx,
        "n_ris": config.n_ris,
        "tx_position": list(config.tx_position),
        "ris_plane_x": config.ris_plane_x,
        "dft_offset": config.dft_offset,
        "dft_indices": list(config.dft_indices),
        "blind_area_center": list(config.blind_area_center),
        "blind_area_radius": config.blind_area_radius,
        "rician_factor_db": [10.0 * math.log10(k) for k in config.rician_factor],
        "n_nlos_tx": list(config.n_nlos_tx),
        "n_paths_rx": list(config.n_paths_rx),
        "prune_threshold_db": config.prune_threshold_db,
        "noise_power_dbm": watts_to_dbm(config.noise_power),
        "transmit_power_dbm": watts_to_dbm(config.transmit_power),
        "xi0": config.xi0,
        "feedback_budget_bits": config.feedback_budget,
        "rng_seed": config.rng_seed,
    }


def _bundled_names():
    return sorted(p.name[:-5] for p in resources.files("riscc.scenarios").iterdir()
                  if p.name.endswith(".json"))


def load_scenario(path_or_name: str) -> ScenarioConfig:
    """Load a scenario from a JSON file path or a bundled scenario name."""
    import os

    if os.path.exists(path_or_name):
        with open(path_or_name, encoding="utf-8") as fh:
            raw = json.load(fh)
    else:
        candidate = resources.files("riscc.scenarios").joinpath(path_or_name + ".json")
        if not candidate.is_file():
            raise ScenarioError(f"scenario {path_or_name!r} is neither a file nor one of "
                                f"the bundled scenarios {_bundled_names()}")
        raw = json.loads(candidate.read_text(encoding="utf-8"))
    return scenario_from_dict(raw)


def paper_default() -> ScenarioConfig:
    """The bundled default scenario (see scenarios/paper_default.json)."""
    return load_scenario("paper_default")


def with_transmit_power_dbm(config: ScenarioConfig, power_dbm: float) -> ScenarioConfig:
    return replace(config, transmit_power=dbm_to_watts(power_dbm))
