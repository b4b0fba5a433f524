"""Command-line interface: simulate / validate / bitalloc subcommands."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import channel, customization, feedback, harness, scenario, transceiver

SEED_ENV_VAR = "RISCC_SEED"


def _resolve_seed(cli_seed, config) -> int:
    """CLI flag wins over the environment, which wins over the scenario file."""
    if cli_seed is not None:
        return int(cli_seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return config.rng_seed


def _cmd_simulate(args) -> int:
    config = scenario.load_scenario(args.scenario)
    seed = _resolve_seed(args.seed, config)
    grid = None
    if args.grid:
        grid = [float(v) for v in args.grid.split(",") if v.strip()]
    result = harness.sweep(config, args.experiment, grid=grid,
                           n_trials=args.trials, seed=seed)
    harness.emit(result, fmt=args.format, path=args.out)
    print(f"{args.experiment}: wrote {len(result.rows)} rows to {args.out} "
          f"(seed {seed}, {args.trials} trials/point)")
    return 0


def _check(name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] {name}{suffix}")
    return ok


def _cmd_validate(args) -> int:
    """Run the invariant suite on a single seeded channel realization."""
    config = scenario.load_scenario(args.scenario)
    seed = _resolve_seed(args.seed, config)
    placements = scenario.place_ris(config)
    rng = np.random.default_rng([seed, 0])
    ok = True

    gram = np.stack([channel.array_response(config.n_tx, p.theta_tx_aod)
                     for p in placements], axis=1)
    off = gram.conj().T @ gram - np.eye(config.n_ris)
    ok &= _check("tx-side DFT orthogonality of RIS directions",
                 np.max(np.abs(off)) <= 1e-12, f"max |off-diag| {np.max(np.abs(off)):.2e}")

    sized = all(p.n_elements == scenario.ris_size(p, config) for p in placements)
    ok &= _check("RIS sizes match the sizing rule", sized,
                 str([p.n_elements for p in placements]))

    tx_segments, rx_segments, losses, selection = feedback._sample_selection(
        config, placements, rng)
    seg = tx_segments[0]
    direct = sum(p.gain * np.outer(channel.array_response(seg.n_out, p.theta_arrival),
                                   channel.array_response(seg.n_in, p.theta_departure).conj())
                 for p in seg.paths)
    rel = np.linalg.norm(seg.matrix - direct) / np.linalg.norm(direct)
    ok &= _check("segment matrix equals its path sum", rel <= 1e-12, f"rel {rel:.2e}")

    phases = customization.design_phases(selection, placements)
    h1 = channel.compose_product(tx_segments, rx_segments, phases, losses,
                                 config.n_rx, config.n_tx)
    h2 = channel.compose_pathsum(tx_segments, rx_segments, phases, losses,
                                 config.n_rx, config.n_tx)
    rel = np.linalg.norm(h1 - h2) / np.linalg.norm(h1)
    ok &= _check("dual channel construction agrees", rel <= 1e-10, f"rel {rel:.2e}")

    expected = np.array([abs(losses[k] * path.gain) for k, path
                         in zip(selection.active_ris, selection.chosen_paths)])
    kappa = np.array([config.rician_factor[k] for k in selection.active_ris])
    n_el = np.array([placements[k].n_elements for k in selection.active_ris])
    expected *= np.sqrt(config.n_tx * n_el * kappa / (kappa + 1.0))
    rel = np.max(np.abs(np.abs(selection.xi_star) - expected) / expected)
    ok &= _check("designed |xi*| equals |rho alpha_R alpha_T|", rel <= 1e-12,
                 f"rel {rel:.2e}")

    p, mu = transceiver.water_filling(np.abs(selection.xi_star) ** 2,
                                      config.transmit_power, config.noise_power)
    budget = abs(p.sum() - config.transmit_power) / config.transmit_power
    active = p > 0
    kkt = np.max(np.abs(mu - config.noise_power / np.abs(selection.xi_star[active]) ** 2
                        - p[active])) if np.any(active) else 0.0
    ok &= _check("water-filling budget and KKT residuals", budget <= 1e-12 and kkt <= 1e-10,
                 f"budget {budget:.2e}, kkt {kkt:.2e}")

    draws = rng.uniform(-np.pi, np.pi, 1000)
    err = np.abs(feedback.quantize_direction(draws, 6) - draws)
    bound = 2 * np.pi / 2 ** 7
    ok &= _check("quantizer error bound at b=6", float(err.max()) <= bound + 1e-15,
                 f"max {err.max():.3e} <= {bound:.3e}")

    gains = channel.cascaded_gains(tx_segments, rx_segments, phases, losses)
    ratio = customization.orthogonal_power_ratio(gains, selection)
    ok &= _check("orthogonal power ratio in [0, 1]", 0.0 <= ratio <= 1.0, f"{ratio:.3f}")

    return 0 if ok else 1


def _cmd_bitalloc(args) -> int:
    c_bar = [float(v) for v in args.cbar.split(",") if v.strip()]
    if not c_bar:
        raise ValueError("--cbar needs at least one link quality")
    if any(c <= 0 for c in c_bar):
        raise ValueError("link qualities must be strictly positive")
    if args.extra < 0:
        raise ValueError("--extra must be >= 0")
    x = feedback.greedy_partition(c_bar, args.extra)
    print(f"link qualities : {c_bar}")
    print(f"extra bits     : {list(map(int, x))}")
    print(f"se loss approx : {feedback.se_loss_approx(c_bar, x):.6f} bps/Hz")
    print(f"se loss upper  : {feedback.se_loss_upper(x):.6f} bps/Hz")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riscc",
        description="Multi-RIS channel customization and limited-feedback simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment sweep")
    sim.add_argument("--scenario", required=True,
                     help="scenario JSON path or bundled name (e.g. paper_default)")
    sim.add_argument("--experiment", required=True, choices=sorted(harness.EXPERIMENTS))
    sim.add_argument("--trials", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=None,
                     help=f"overrides ${SEED_ENV_VAR} and the scenario file seed")
    sim.add_argument("--out", required=True)
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--grid", default=None,
                     help="comma-separated sweep grid (experiment default if omitted)")
    sim.set_defaults(func=_cmd_simulate)

    val = sub.add_parser("validate", help="run the invariant suite on one realization")
    val.add_argument("--scenario", required=True)
    val.add_argument("--seed", type=int, default=None)
    val.set_defaults(func=_cmd_validate)

    bits = sub.add_parser("bitalloc", help="greedy extra-bit partition for given link qualities")
    bits.add_argument("--cbar", required=True, help="comma-separated link qualities")
    bits.add_argument("--extra", type=int, required=True, help="extra feedback bits to split")
    bits.set_defaults(func=_cmd_bitalloc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
