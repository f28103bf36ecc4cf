"""Command-line front end.

Subcommands map one-to-one onto the library operations and drop their
results as fixed-schema CSV files plus a run manifest into ``--out``.
``repro`` bundles the sweep presets behind ``--figure``.  Exit codes: 0 on
success, 2 when a scenario fails validation or feasibility (the violated
bound is printed), 1 on internal errors, 64 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import fos_pilots, wbe_meta, wbe_pilots
from .capacity import (
    boundary_surface,
    max_sinr_solve,
    region_check,
    region_volume,
    sinr_pattern,
    user_capacity_bound,
)
from .gwbe import design_network
from .link import allocate_power, compute_alpha, min_antennas, sinr_asymptotic, sinr_finite
from .model import FeasibilityError
from .montecarlo import simulate
from .scenario_io import Scenario, load_scenario, write_manifest, write_tables

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="pilotforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pilotforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, scheme_default="all"):
        p.add_argument("--scenario", help="scenario file (defaults to the bundled two-cell benchmark)")
        p.add_argument("--scheme", choices=("gwbe", "wbe", "fos", "all"), default=None)
        p.add_argument("--antennas", nargs="+", type=int, default=None)
        p.add_argument("--mu", type=float, default=None)
        p.add_argument("--realizations", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", required=True, help="output directory")
        return p

    common(sub.add_parser("design", help="design pilots, alpha and powers"))
    common(sub.add_parser("capacity", help="capacity bound and per-cell region checks"))
    common(sub.add_parser("sinr", help="closed-form SINR at the requested antenna counts"))
    common(sub.add_parser("min-antennas", help="minimum antennas for the satisfaction index"))
    common(sub.add_parser("montecarlo", help="simulated SINR vs the closed form"))

    p = common(sub.add_parser("max-sinr", help="largest admissible SINR over a target family"))
    p.add_argument("--family", choices=("fig3", "fig4", "fig5"), required=True)
    p.add_argument("--K", default="4..14", help="per-cell user range a..b for the fig3 family")
    p.add_argument("--grid", type=int, default=25)

    p = common(sub.add_parser("boundary", help="region boundary surface"))
    p.add_argument("--grid", type=int, default=41)

    p = common(sub.add_parser("region-volume", help="Monte Carlo admissible-set volume"))

    p = common(sub.add_parser("repro", help="one-command sweep presets"))
    p.add_argument("--figure", choices=("2", "3", "4", "5", "6"), required=True)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--K", default="4..14")
    return parser


def _default_scenario_path() -> Path:
    return Path(str(resources.files("pilotforge") / "data" / "table1.scenario"))


def _load(args) -> Scenario:
    path = args.scenario or _default_scenario_path()
    scenario = load_scenario(path)
    overrides = {}
    if args.scheme is not None:
        overrides["scheme"] = args.scheme
    if getattr(args, "antennas", None):
        overrides["antennas"] = tuple(args.antennas)
    if getattr(args, "mu", None) is not None:
        if not 0.0 < args.mu < 1.0:
            raise ValueError("--mu must lie in (0, 1)")
        overrides["mu"] = args.mu
    if getattr(args, "realizations", None) is not None:
        overrides["realizations"] = args.realizations
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace

        scenario = replace(scenario, **overrides)
    return scenario


def _schemes(scenario: Scenario):
    return ("gwbe", "wbe", "fos") if scenario.scheme == "all" else (scenario.scheme,)


def _design_for(scheme: str, scenario: Scenario):
    """Pilot book, meta, targets (gamma_hat filled where relevant) and power."""
    cfg = scenario.config
    if scheme == "gwbe":
        book, targets = design_network(scenario.targets, cfg)
        meta = None
    elif scheme == "wbe":
        book, meta = wbe_pilots(cfg.users_per_cell, cfg.pilot_length, cfg.num_cells)
        targets = scenario.targets
    else:
        book, meta = fos_pilots(cfg.users_per_cell, cfg.pilot_length, cfg.num_cells)
        targets = scenario.targets
    alpha = compute_alpha(book, cfg)
    power = allocate_power(alpha, targets, scheme)
    return book, meta, targets, power


def _parse_range(text: str):
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(text)
    if lo < 1 or hi < lo:
        raise ValueError(f"bad range {text!r}")
    return range(lo, hi + 1)


def _cmd_design(args) -> int:
    scenario = _load(args)
    tables = {}
    alpha_entries, power_entries = [], []
    order = scenario.targets.input_order
    for scheme in _schemes(scenario):
        book, _, targets, power = _design_for(scheme, scenario)
        name = "pilots.csv" if len(_schemes(scenario)) == 1 else f"pilots_{scheme}.csv"
        tables[("pilots", name)] = (book, order)
        alpha_entries.append((scheme, power.alpha))
        power_entries.append((scheme, targets, power))
    tables["alpha"] = {"data": alpha_entries, "input_order": order}
    tables["power"] = power_entries
    write_tables(tables, args.out, scenario)
    return 0


def _cmd_capacity(args) -> int:
    scenario = _load(args)
    cfg = scenario.config
    bound, admissible = user_capacity_bound(scenario.targets, cfg.pilot_length)
    print(
        f"user capacity bound {bound:.6g} for {cfg.num_users_total} users "
        f"({'admissible' if admissible else 'NOT admissible'})"
    )
    rows = []
    for scheme in _schemes(scenario):
        meta = (
            wbe_meta(cfg.users_per_cell, cfg.pilot_length, cfg.num_cells)
            if scheme == "wbe"
            else None
        )
        for cell, check in enumerate(
            region_check(scenario.targets, cfg.pilot_length, scheme, meta), start=1
        ):
            print(
                f"{scheme} cell {cell}: bandwidth {check.lhs:.6g} vs bound "
                f"{check.bound:.6g} -> {'ok' if check.satisfied else 'violated'}"
            )
            rows.append(
                (
                    scheme,
                    cell,
                    check.lhs,
                    check.bound,
                    check.satisfied,
                    len(check.cap_violations),
                )
            )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    from .scenario_io import _write_csv

    written = _write_csv(
        out / "capacity.csv",
        ["scheme", "cell", "lhs", "bound", "satisfied", "cap_violations"],
        rows,
    )
    write_manifest(out / "run.manifest", scenario, [written.name])
    return 0


def _cmd_sinr(args) -> int:
    scenario = _load(args)
    entries = []
    for scheme in _schemes(scenario):
        book, _, targets, power = _design_for(scheme, scenario)
        asy = sinr_asymptotic(book, power, scenario.config, targets)
        for m in scenario.antennas:
            fin = sinr_finite(book, power, scenario.config, m, targets)
            entries.append((scheme, m, fin, asy, targets))
    write_tables({"sinr": entries}, args.out, scenario)
    return 0


def _cmd_min_antennas(args) -> int:
    scenario = _load(args)
    entries = []
    for scheme in _schemes(scenario):
        book, _, targets, power = _design_for(scheme, scenario)
        per_user, network = min_antennas(book, power, scenario.config, scenario.mu)
        entries.append((scheme, scenario.mu, per_user, network, targets))
        print(f"{scheme}: network minimum {network} antennas at mu={scenario.mu}")
    write_tables({"minant": entries}, args.out, scenario)
    return 0


def _cmd_montecarlo(args) -> int:
    scenario = _load(args)
    entries = []
    for scheme in _schemes(scenario):
        book, _, targets, power = _design_for(scheme, scenario)
        for m in scenario.antennas:
            report = simulate(
                scenario.config, book, power, m, scenario.realizations, scenario.seed
            )
            analytic = sinr_finite(book, power, scenario.config, m, targets)
            entries.append((scheme, report, analytic.theta, targets))
    write_tables({"mc": entries}, args.out, scenario)
    return 0


def _cmd_max_sinr(args) -> int:
    scenario = _load(args)
    cfg = scenario.config
    tau = cfg.pilot_length
    rows = []
    schemes = _schemes(scenario)
    if args.family == "fig3":
        for K in _parse_range(args.K):
            for scheme in schemes:
                meta = wbe_meta(K, tau, 2) if scheme == "wbe" else None
                g = max_sinr_solve(sinr_pattern("fig3", K), scheme, tau, 2, meta)
                rows.append((scheme, "fig3", "users_per_cell", K, g))
    elif args.family == "fig4":
        omegas = np.logspace(-2, 1, args.grid)
        for omega in omegas:
            for scheme in schemes:
                meta = wbe_meta(5, tau, 2) if scheme == "wbe" else None
                g = max_sinr_solve(
                    sinr_pattern("fig4", 5, omega=omega), scheme, tau, 2, meta
                )
                rows.append((scheme, "fig4", "omega", omega, g))
    else:
        for L in range(2, 11):
            for scheme in schemes:
                meta = wbe_meta(5, tau, L) if scheme == "wbe" else None
                g = max_sinr_solve(sinr_pattern("fig5", 5), scheme, tau, L, meta)
                rows.append((scheme, "fig5", "cells", L, g))
    write_tables({"maxsinr": rows}, args.out, scenario)
    return 0


def _cmd_boundary(args, tail_override=None) -> int:
    scenario = _load(args)
    cfg = scenario.config
    L, K, tau = cfg.num_cells, cfg.users_per_cell, cfg.pilot_length
    if K < 3:
        raise ValueError("boundary surface needs at least 3 users per cell")
    tail = scenario.targets.gamma[0, 3:] if tail_override is None else np.asarray(tail_override)
    row_users = 3 + tail.size  # two swept targets, one solved, the fixed tail
    cap = 1.0 / (L - 1) if L >= 2 else 1.0
    grid = np.linspace(0.0, cap, args.grid)
    entries = []
    for scheme in _schemes(scenario):
        meta = wbe_meta(row_users, tau, L) if scheme == "wbe" else None
        entries.append((scheme, boundary_surface(scheme, tau, L, tail, grid, grid, meta)))
    write_tables({"boundary": entries}, args.out, scenario)
    return 0


def _cmd_region_volume(args) -> int:
    scenario = _load(args)
    cfg = scenario.config
    L, K, tau = cfg.num_cells, cfg.users_per_cell, cfg.pilot_length
    samples = scenario.realizations
    tail = scenario.targets.gamma[0, 3:]
    entries = []
    for scheme in _schemes(scenario):
        meta = wbe_meta(K, tau, L) if scheme == "wbe" else None
        vol, err = region_volume(scheme, L, K, tau, tail, samples, scenario.seed, meta)
        entries.append((scheme, samples, scenario.seed, vol, err))
        print(f"{scheme}: admissible volume {vol:.6g} +/- {err:.2g}")
    write_tables({"region": entries}, args.out, scenario)
    return 0


def _cmd_repro(args) -> int:
    if args.scheme is None:
        args.scheme = "all"  # the presets compare the three designs
    if args.figure == "2":
        args.grid = args.grid or 41
        # preset sweeps the first three users with the fourth pinned at 0.20
        return _cmd_boundary(args, tail_override=[0.20])
    if args.figure in ("3", "4", "5"):
        args.family = f"fig{args.figure}"
        args.grid = args.grid or 25
        return _cmd_max_sinr(args)
    # figure 6: minimum antennas for all three designs
    return _cmd_min_antennas(args)


_COMMANDS = {
    "design": _cmd_design,
    "capacity": _cmd_capacity,
    "sinr": _cmd_sinr,
    "min-antennas": _cmd_min_antennas,
    "montecarlo": _cmd_montecarlo,
    "max-sinr": _cmd_max_sinr,
    "boundary": _cmd_boundary,
    "region-volume": _cmd_region_volume,
    "repro": _cmd_repro,
}


def _check_thread_env() -> None:
    raw = os.environ.get("PILOTFORGE_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"PILOTFORGE_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError("PILOTFORGE_THREADS must be >= 1")
    # current engine evaluates serially (deterministic for any cap)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _check_thread_env()
        return _COMMANDS[args.command](args)
    except (FeasibilityError, ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # pragma: no cover - defensive
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
