"""Monte Carlo experiment driver: CSI regimes, trial orchestration, sweeps
and CSV/JSON emission.

Reproducibility contract: (scenario, seed, experiment id, grid, trials)
fully determines every emitted number.  Trial t at grid point g draws from
``default_rng([seed, g, t])``, so regimes within an experiment share
channel realizations (paired comparisons) and trials are order-independent.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import channel, customization, feedback, scenario, transceiver
from .feedback import QuantizationPlan
from .scenario import ScenarioConfig

P_CSI = "P-CSI"
PL_CSI = "PL-CSI"
QL_CSI = "QL-CSI"
PLS_CSI = "PLS-CSI"
QLS_CSI = "QLS-CSI"
REGIME_TAGS = (P_CSI, PL_CSI, QL_CSI, PLS_CSI, QLS_CSI)

CSV_HEADER = ("sweep", "regime", "metric", "value", "stderr", "n_trials", "seed")
RESULT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CsiRegime:
    """One feedback regime: what the Tx knows and how power is allocated.

    Quantized regimes (QL/QLS) require a bit plan; the statistical regimes
    (PLS/QLS) lack singular-value feedback and therefore force equal power,
    the others water-fill.
    """

    tag: str
    plan: QuantizationPlan | None = None

    def __post_init__(self):
        if self.tag not in REGIME_TAGS:
            raise ValueError(f"unknown CSI regime {self.tag!r}, expected one of {REGIME_TAGS}")
        if self.quantized and self.plan is None:
            raise ValueError(f"{self.tag} requires a quantization plan")
        if not self.quantized and self.plan is not None:
            raise ValueError(f"{self.tag} must not carry a quantization plan")

    @property
    def quantized(self) -> bool:
        return self.tag in (QL_CSI, QLS_CSI)

    @property
    def allocation(self) -> str:
        return transceiver.EQUAL if self.tag in (PLS_CSI, QLS_CSI) else transceiver.WATERFILLING


@dataclass(frozen=True)
class ResultRow:
    sweep: float
    regime: str
    metric: str
    value: float
    stderr: float
    n_trials: int
    seed: int


@dataclass
class ExperimentResult:
    experiment: str
    scenario: str
    seed: int
    rows: list = field(default_factory=list)


def run_trial(config: ScenarioConfig, regime: CsiRegime, rng: np.random.Generator,
              placements=None, phase_mode: str = "designed",
              raw_combiner: bool = False) -> dict:
    """One full pipeline pass under a CSI regime.

    Samples the Rx position and all segment channels, prunes, selects the
    orthogonal paths, designs the RIS phases (quantized directions for
    QL/QLS), builds the regime's transceiver and evaluates the log-det
    spectral efficiency on the realized composite channel.

    Returns {"se", "se_loss", "power_ratio"}; se_loss is the gap to the
    same transceiver under exact directions (zero for unquantized regimes).
    """
    if phase_mode not in ("designed", "identity"):
        raise ValueError(f"unknown phase_mode {phase_mode!r}")
    if placements is None:
        placements = scenario.place_ris(config)
    tx_segments, rx_segments, path_losses, selection = feedback._sample_selection(
        config, placements, rng)
    total_power, noise = config.transmit_power, config.noise_power

    if phase_mode == "identity":
        exact_phases = channel.identity_phases(placements)
    else:
        exact_phases = customization.design_phases(selection, placements)
    if regime.quantized:
        theta_q = feedback.quantized_directions(selection, regime.plan, placements)
        phases = customization.design_phases(selection, placements, theta_q)
    else:
        phases = exact_phases

    h = channel.compose_product(tx_segments, rx_segments, phases, path_losses,
                                config.n_rx, config.n_tx)
    if regime.tag == P_CSI:
        trx = transceiver.svd_transceiver(h, total_power, noise, regime.allocation)
        combiner = trx.combiner
    else:
        trx = transceiver.cc_transceiver(selection, total_power, noise, regime.allocation)
        combiner = trx.combiner if raw_combiner else transceiver.whiten_combiner(trx.combiner)
    se = transceiver.spectral_efficiency(h, trx.precoder, combiner, noise,
                                         require_orthonormal=not raw_combiner)

    se_loss = 0.0
    if regime.quantized:
        h_exact = channel.compose_product(tx_segments, rx_segments, exact_phases,
                                          path_losses, config.n_rx, config.n_tx)
        se_exact = transceiver.spectral_efficiency(h_exact, trx.precoder, combiner, noise,
                                                   require_orthonormal=not raw_combiner)
        se_loss = se_exact - se

    gains = channel.cascaded_gains(tx_segments, rx_segments, phases, path_losses)
    ratio = customization.orthogonal_power_ratio(gains, selection)
    return {"se": se, "se_loss": se_loss, "power_ratio": ratio}


# ---------------------------------------------------------------------------
# experiments

def build_plan(config: ScenarioConfig, placements, extra_bits) -> QuantizationPlan:
    """Per-stream plan for a scenario; stream i maps to the i-th active RIS."""
    if config.n_ris == config.n_rx:
        sizes = [p.n_elements for p in placements]
    else:
        mins = {feedback.min_bits(p.n_elements) for p in placements}
        if len(mins) > 1:
            raise ValueError("a fixed per-stream plan needs uniform minimum bits "
                             "across RISs when n_ris > n_rx")
        sizes = [placements[0].n_elements] * config.n_rx
    return feedback.plan_for_sizes(sizes, extra_bits)


def _mean_stderr(values: np.ndarray):
    n = len(values)
    err = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(values.mean()), err


def _require_square(config, experiment):
    if config.n_ris != config.n_rx:
        raise ValueError(f"experiment {experiment} assumes n_ris == n_rx "
                         "(fixed stream-to-RIS mapping)")


def _se_curve_rows(config, placements, grid, n_trials, seed, variants, metric="ergodic_se"):
    """Shared driver: mean SE per grid point for (label, regime, phase_mode) variants."""
    rows = []
    for gi, dbm in enumerate(grid):
        cfg = scenario.with_transmit_power_dbm(config, float(dbm))
        acc = {label: np.empty(n_trials) for label, _, _ in variants}
        for t in range(n_trials):
            for label, regime, phase_mode in variants:
                rng = np.random.default_rng([seed, gi, t])
                out = run_trial(cfg, regime, rng, placements=placements,
                                phase_mode=phase_mode)
                acc[label][t] = out["se"]
        for label, _, _ in variants:
            mean, err = _mean_stderr(acc[label])
            rows.append(ResultRow(float(dbm), label, metric, mean, err, n_trials, seed))
    return rows


def _exp_path_ratio_cdf(config, grid, n_trials, seed):
    placements = scenario.place_ris(config)
    ratios = {"designed": np.empty(n_trials), "undesigned": np.empty(n_trials)}
    for t in range(n_trials):
        rng = np.random.default_rng([seed, 0, t])
        tx_segments, rx_segments, losses, selection = feedback._sample_selection(
            config, placements, rng)
        designed = customization.design_phases(selection, placements)
        identity = channel.identity_phases(placements)
        for label, phases in (("designed", designed), ("undesigned", identity)):
            gains = channel.cascaded_gains(tx_segments, rx_segments, phases, losses)
            ratios[label][t] = customization.orthogonal_power_ratio(gains, selection)
    rows = []
    for label in ("designed", "undesigned"):
        for thr in grid:
            p = float(np.mean(ratios[label] <= thr))
            err = math.sqrt(p * (1.0 - p) / n_trials)
            rows.append(ResultRow(float(thr), label, "power_ratio_cdf", p, err,
                                  n_trials, seed))
    return rows


def _exp_se_loss_vs_power(config, grid, n_trials, seed):
    _require_square(config, "se_loss_vs_power")
    placements = scenario.place_ris(config)
    rows = []
    for gi, dbm in enumerate(grid):
        cfg = scenario.with_transmit_power_dbm(config, float(dbm))
        c_bar = [feedback.c_bar_closed_form(cfg, p, p.d_ref) for p in placements]
        for extra in (1, 2, 4, 8):
            split = feedback.equal_extra_bits(cfg.n_rx, extra)
            plan = build_plan(cfg, placements, split)
            label = f"QL-CSI[x={extra}]"
            mean, err = feedback.ergodic_se_loss_mc(cfg, plan, n_trials, (seed, gi))
            rows.append(ResultRow(float(dbm), label, "se_loss_mc", mean, err,
                                  n_trials, seed))
            rows.append(ResultRow(float(dbm), label, "se_loss_approx",
                                  feedback.se_loss_approx(c_bar, split), 0.0, 0, seed))
            rows.append(ResultRow(float(dbm), label, "se_loss_upper",
                                  feedback.se_loss_upper(split), 0.0, 0, seed))
    return rows


def _exp_ergodic_se_vs_power(config, grid, n_trials, seed):
    _require_square(config, "ergodic_se_vs_power")
    placements = scenario.place_ris(config)
    plan8 = build_plan(config, placements, feedback.equal_extra_bits(config.n_rx, 8))
    plan0 = build_plan(config, placements, (0,) * config.n_rx)
    variants = [
        (P_CSI, CsiRegime(P_CSI), "designed"),
        (PL_CSI, CsiRegime(PL_CSI), "designed"),
        ("QL-CSI[x=8]", CsiRegime(QL_CSI, plan8), "designed"),
        ("QL-CSI[x=0]", CsiRegime(QL_CSI, plan0), "designed"),
        ("P-CSI[undesigned]", CsiRegime(P_CSI), "identity"),
    ]
    return _se_curve_rows(config, placements, grid, n_trials, seed, variants)


def _exp_wf_vs_equal(config, grid, n_trials, seed):
    _require_square(config, "wf_vs_equal")
    placements = scenario.place_ris(config)
    plan2 = build_plan(config, placements, feedback.equal_extra_bits(config.n_rx, 2))
    plan4 = build_plan(config, placements, feedback.equal_extra_bits(config.n_rx, 4))
    variants = [
        (PL_CSI, CsiRegime(PL_CSI), "designed"),
        (PLS_CSI, CsiRegime(PLS_CSI), "designed"),
        ("QL-CSI[x=2]", CsiRegime(QL_CSI, plan2), "designed"),
        ("QLS-CSI[x=2]", CsiRegime(QLS_CSI, plan2), "designed"),
        ("QLS-CSI[x=4]", CsiRegime(QLS_CSI, plan4), "designed"),
    ]
    return _se_curve_rows(config, placements, grid, n_trials, seed, variants)


def _exp_pruning_ablation(config, grid, n_trials, seed):
    placements = scenario.place_ris(config)
    no_prune = replace(config, prune_threshold_db=math.inf)
    rows = []
    for gi, dbm in enumerate(grid):
        cfg = scenario.with_transmit_power_dbm(config, float(dbm))
        cfg_raw = scenario.with_transmit_power_dbm(no_prune, float(dbm))
        acc = {"PL-CSI[pruned]": np.empty(n_trials), "PL-CSI[unpruned]": np.empty(n_trials)}
        for t in range(n_trials):
            for label, c in (("PL-CSI[pruned]", cfg), ("PL-CSI[unpruned]", cfg_raw)):
                rng = np.random.default_rng([seed, gi, t])
                acc[label][t] = run_trial(c, CsiRegime(PL_CSI), rng,
                                          placements=placements)["se"]
        for label, values in acc.items():
            mean, err = _mean_stderr(values)
            rows.append(ResultRow(float(dbm), label, "ergodic_se", mean, err,
                                  n_trials, seed))
    return rows


def _exp_se_loss_vs_bits(config, grid, n_trials, seed):
    _require_square(config, "se_loss_vs_bits")
    placements = scenario.place_ris(config)
    c_bar = [feedback.c_bar_closed_form(config, p, p.d_ref) for p in placements]
    rows = []
    for gi, extra in enumerate(grid):
        extra = int(extra)
        alloc_rng = np.random.default_rng([seed, 424242, gi])
        splits = {
            "greedy": tuple(int(x) for x in feedback.greedy_partition(c_bar, extra)),
            "random": tuple(np.bincount(alloc_rng.integers(0, config.n_rx, size=extra),
                                        minlength=config.n_rx).tolist()),
        }
        for label, split in splits.items():
            plan = build_plan(config, placements, split)
            mean, err = feedback.ergodic_se_loss_mc(config, plan, n_trials, (seed, gi))
            rows.append(ResultRow(float(extra), label, "se_loss_mc", mean, err,
                                  n_trials, seed))
            rows.append(ResultRow(float(extra), label, "se_loss_approx",
                                  feedback.se_loss_approx(c_bar, split), 0.0, 0, seed))
    return rows


def _exp_se_vs_ns(config, grid, n_trials, seed):
    _require_square(config, "se_vs_ns")
    base_placements = scenario.place_ris(config)
    rows = []
    for gi, ns in enumerate(grid):
        ns = int(ns)
        if ns < 1:
            raise ValueError("RIS element base size must be >= 1")
        # the sweep overrides the sizing rule with N_{S,k} = ns * k^2
        placements = [replace(p, n_elements=ns * (p.index + 1) ** 2)
                      for p in base_placements]
        plan2 = build_plan(config, placements, feedback.equal_extra_bits(config.n_rx, 2))
        variants = [
            (PL_CSI, CsiRegime(PL_CSI), "designed"),
            (PLS_CSI, CsiRegime(PLS_CSI), "designed"),
            ("QL-CSI[x=2]", CsiRegime(QL_CSI, plan2), "designed"),
            ("QLS-CSI[x=2]", CsiRegime(QLS_CSI, plan2), "designed"),
            ("P-CSI[undesigned]", CsiRegime(P_CSI), "identity"),
        ]
        acc = {label: np.empty(n_trials) for label, _, _ in variants}
        for t in range(n_trials):
            for label, regime, phase_mode in variants:
                rng = np.random.default_rng([seed, gi, t])
                acc[label][t] = run_trial(config, regime, rng, placements=placements,
                                          phase_mode=phase_mode)["se"]
        for label, _, _ in variants:
            mean, err = _mean_stderr(acc[label])
            rows.append(ResultRow(float(ns), label, "ergodic_se", mean, err,
                                  n_trials, seed))
    return rows


_DEFAULT_GRIDS = {
    "path_ratio_cdf": tuple(np.linspace(0.0, 1.0, 21)),
    "se_loss_vs_power": (-20.0, -15.0, -10.0, -5.0, 0.0),
    "ergodic_se_vs_power": (-20.0, -15.0, -10.0, -5.0, 0.0),
    "wf_vs_equal": (-20.0, -19.0, -18.0, -17.0, -16.0, -15.0),
    "pruning_ablation": (-20.0, -10.0, 0.0),
    "se_loss_vs_bits": (0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0),
    "se_vs_ns": (16.0, 32.0, 64.0, 96.0, 128.0),
}

EXPERIMENTS = {
    "path_ratio_cdf": _exp_path_ratio_cdf,
    "se_loss_vs_power": _exp_se_loss_vs_power,
    "ergodic_se_vs_power": _exp_ergodic_se_vs_power,
    "wf_vs_equal": _exp_wf_vs_equal,
    "pruning_ablation": _exp_pruning_ablation,
    "se_loss_vs_bits": _exp_se_loss_vs_bits,
    "se_vs_ns": _exp_se_vs_ns,
}


def sweep(config: ScenarioConfig, experiment: str, grid=None, n_trials: int = 1000,
          seed=None) -> ExperimentResult:
    """Run one named experiment over a grid and aggregate per-point metrics."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; "
                         f"known: {sorted(EXPERIMENTS)}")
    if grid is None:
        grid = _DEFAULT_GRIDS[experiment]
    grid = list(grid)
    if not grid:
        raise ValueError("empty sweep grid")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    seed = config.rng_seed if seed is None else int(seed)
    rows = EXPERIMENTS[experiment](config, grid, n_trials, seed)
    return ExperimentResult(experiment=experiment, scenario=config.name,
                            seed=seed, rows=rows)


# ---------------------------------------------------------------------------
# emission

def emit(result: ExperimentResult, fmt: str = "csv", path: str = "") -> None:
    """Write a result as CSV (fixed header) or schema-versioned JSON.

    Floats are written with shortest round-trip repr, so identical inputs
    produce byte-identical files on any platform.
    """
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in result.rows:
                writer.writerow([repr(float(r.sweep)), r.regime, r.metric,
                                 repr(float(r.value)), repr(float(r.stderr)),
                                 r.n_trials, r.seed])
    elif fmt == "json":
        payload = {
            "schema_version": RESULT_SCHEMA_VERSION,
            "experiment": result.experiment,
            "scenario": result.scenario,
            "seed": result.seed,
            "rows": [asdict(r) for r in result.rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt!r} (use 'csv' or 'json')")


def load_result(path: str) -> ExperimentResult:
    """Read back a JSON result file."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema_version") != RESULT_SCHEMA_VERSION:
        raise ValueError(f"unsupported result schema {payload.get('schema_version')!r}")
    rows = [ResultRow(**row) for row in payload["rows"]]
    return ExperimentResult(experiment=payload["experiment"],
                            scenario=payload["scenario"],
                            seed=payload["seed"], rows=rows)
