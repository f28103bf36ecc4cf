"""Scenario ingestion and CSV/manifest persistence.

Scenarios are flat JSON documents (conventionally ``*.scenario``) with the
fields ``cells``, ``users_per_cell``, ``pilot_length``, ``sigma_z2``,
``sigma_w2``, ``targets`` (L x K), optional ``gamma_hat``, ``xi2_cross``,
``beta_cross`` (or full ``xi_squared`` / ``beta`` tensors for per-entry
overrides), ``scheme``, ``antennas``, ``mu``, ``realizations`` and ``seed``.
Unspecified propagation fields default to the canonical two-cell benchmark:
unit same-cell gains, 0.9 cross-cell, unit noise powers.

Result CSVs are byte-stable for fixed inputs: fixed header order, 12
significant digits, ``\n`` newlines, no locale formatting.  The run manifest
echoes the effective scenario with a content hash (plus a timestamp, which
is the one non-reproducible field).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .model import NetworkConfig, SinrTargets

_REQUIRED = ("cells", "users_per_cell", "pilot_length", "targets")
_OPTIONAL = {
    "sigma_z2": 1.0,
    "sigma_w2": 1.0,
    "xi2_cross": 0.9,
    "beta_cross": 0.9,
    "gamma_hat": None,
    "xi_squared": None,
    "beta": None,
    "scheme": "gwbe",
    "antennas": [100, 200, 300],
    "mu": 0.9,
    "realizations": 1000,
    "seed": 12345,
}
_KNOWN = set(_REQUIRED) | set(_OPTIONAL)

SCHEME_CHOICES = ("gwbe", "wbe", "fos", "all")


@dataclass(frozen=True)
class Scenario:
    """Validated experiment description: network, targets and run options."""

    config: NetworkConfig
    targets: SinrTargets
    scheme: str
    antennas: tuple
    mu: float
    realizations: int
    seed: int


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(
            f"{path}: parse error at line {err.lineno}, column {err.colno}: {err.msg}"
        ) from None
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: scenario must be a JSON object")
    return scenario_from_dict(raw, source=str(path))


def scenario_from_dict(raw: dict, source: str = "<dict>") -> Scenario:
    unknown = sorted(set(raw) - _KNOWN)
    if unknown:
        raise ValueError(f"{source}: unknown fields {unknown}")
    missing = [f for f in _REQUIRED if f not in raw]
    if missing:
        raise ValueError(f"{source}: missing required fields {missing}")
    merged = dict(_OPTIONAL)
    merged.update(raw)

    L = _as_int(merged["cells"], "cells")
    K = _as_int(merged["users_per_cell"], "users_per_cell")
    tau = _as_int(merged["pilot_length"], "pilot_length")
    scheme = str(merged["scheme"]).lower()
    if scheme not in SCHEME_CHOICES:
        raise ValueError(f"{source}: scheme must be one of {SCHEME_CHOICES}")
    if scheme in ("gwbe", "wbe", "all") and not tau < K:
        raise ValueError(
            f"{source}: scheme {scheme!r} needs pilot_length < users_per_cell "
            f"(got tau={tau}, K={K})"
        )

    if merged["xi_squared"] is not None:
        xi2 = np.asarray(merged["xi_squared"], dtype=float)
    else:
        xi2 = _uniform_tensor(L, K, float(merged["xi2_cross"]))
    if merged["beta"] is not None:
        beta = np.asarray(merged["beta"], dtype=float)
    else:
        beta = _uniform_tensor(L, K, float(merged["beta_cross"]))
    config = NetworkConfig(
        num_cells=L,
        users_per_cell=K,
        pilot_length=tau,
        uplink_noise_power=float(merged["sigma_z2"]),
        downlink_noise_power=float(merged["sigma_w2"]),
        xi_squared=xi2,
        beta=beta,
    )

    targets_raw = np.asarray(merged["targets"], dtype=float)
    if targets_raw.shape != (L, K):
        raise ValueError(
            f"{source}: targets must be {L} x {K}, got {targets_raw.shape}"
        )
    gh = merged["gamma_hat"]
    if gh is not None:
        gh = np.asarray(gh, dtype=float)
        if gh.shape != (L, K):
            raise ValueError(f"{source}: gamma_hat must be {L} x {K}")
    targets = SinrTargets.from_rows(targets_raw, gamma_hat=gh)

    antennas = tuple(_as_int(m, "antennas entry") for m in merged["antennas"])
    if any(m < 1 for m in antennas):
        raise ValueError(f"{source}: antenna counts must be >= 1")
    mu = float(merged["mu"])
    if not 0.0 < mu < 1.0:
        raise ValueError(f"{source}: mu must lie in (0, 1)")
    realizations = _as_int(merged["realizations"], "realizations")
    if realizations < 1:
        raise ValueError(f"{source}: realizations must be >= 1")
    seed = _as_int(merged["seed"], "seed")
    return Scenario(
        config=config,
        targets=targets,
        scheme=scheme,
        antennas=antennas,
        mu=mu,
        realizations=realizations,
        seed=seed,
    )


def _as_int(value, name: str) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _uniform_tensor(L: int, K: int, cross: float) -> np.ndarray:
    t = np.full((L, K, L), cross)
    idx = np.arange(L)
    t[idx, :, idx] = 1.0
    return t


def scenario_to_dict(s: Scenario) -> dict:
    """Canonical JSON-ready form; scalar cross fields when tensors are uniform."""
    cfg = s.config
    out = {
        "cells": cfg.num_cells,
        "users_per_cell": cfg.users_per_cell,
        "pilot_length": cfg.pilot_length,
        "sigma_z2": cfg.uplink_noise_power,
        "sigma_w2": cfg.downlink_noise_power,
        "targets": _rows_in_input_order(s.targets.gamma, s.targets.input_order),
        "scheme": s.scheme,
        "antennas": list(s.antennas),
        "mu": s.mu,
        "realizations": s.realizations,
        "seed": s.seed,
    }
    if s.targets.gamma_hat is not None:
        out["gamma_hat"] = _rows_in_input_order(
            s.targets.gamma_hat, s.targets.input_order
        )
    for key, tensor in (("xi2", cfg.xi_squared), ("beta", cfg.beta)):
        cross = _uniform_cross(tensor, cfg.num_cells)
        if cross is not None:
            out[f"{key}_cross" if key == "xi2" else "beta_cross"] = cross
        else:
            out["xi_squared" if key == "xi2" else "beta"] = tensor.tolist()
    return out


def _rows_in_input_order(matrix: np.ndarray, order: np.ndarray) -> list:
    restored = np.empty_like(matrix)
    np.put_along_axis(restored, order, matrix, axis=1)
    return restored.tolist()


def _uniform_cross(tensor: np.ndarray, L: int):
    if L == 1:
        return 1.0
    idx = np.arange(L)
    cross_mask = np.ones_like(tensor, dtype=bool)
    cross_mask[idx, :, idx] = False
    vals = tensor[cross_mask]
    if np.ptp(vals) == 0.0:
        return float(vals[0])
    return None


def write_scenario(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


def scenario_hash(s: Scenario) -> str:
    canonical = json.dumps(scenario_to_dict(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# CSV writers (fixed schemas, byte-stable formatting)

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return "nan"
    if np.isposinf(v):
        return "inf"
    return f"{v:.12g}"


def _write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _user_iter(num_cells: int, users_per_cell: int, input_order=None):
    """Yield (cell_1based, original_user_1based, sorted_pos_0based) rows."""
    if input_order is None:
        input_order = np.tile(np.arange(users_per_cell), (num_cells, 1))
    inverse = np.argsort(np.asarray(input_order), axis=1)
    for l in range(num_cells):
        for orig in range(users_per_cell):
            yield l + 1, orig + 1, int(inverse[l, orig])


def write_pilots_csv(path, book, input_order=None) -> Path:
    tau = book.pilot_length
    header = ["cell", "user"] + [f"component_{t + 1}" for t in range(tau)]
    rows = []
    for cell, user, pos in _user_iter(book.num_cells, book.users_per_cell, input_order):
        col = book.sequences[:, (cell - 1) * book.users_per_cell + pos]
        rows.append([cell, user, *col])
    return _write_csv(path, header, rows)


def write_alpha_csv(path, entries, input_order=None) -> Path:
    """entries: iterable of (scheme, alpha matrix)."""
    header = ["scheme", "cell", "user", "alpha"]
    rows = []
    for scheme, alpha in entries:
        alpha = np.asarray(alpha)
        for cell, user, pos in _user_iter(*alpha.shape, input_order):
            rows.append([scheme, cell, user, alpha[cell - 1, pos]])
    return _write_csv(path, header, rows)


def write_power_csv(path, entries) -> Path:
    """entries: iterable of (scheme, targets, PowerAllocation)."""
    header = ["scheme", "cell", "user", "gamma", "gamma_hat", "power"]
    rows = []
    for scheme, targets, power in entries:
        gh = targets.gamma_hat
        for cell, user, pos in _user_iter(
            targets.num_cells, targets.users_per_cell, targets.input_order
        ):
            rows.append(
                [
                    scheme,
                    cell,
                    user,
                    targets.gamma[cell - 1, pos],
                    None if gh is None else gh[cell - 1, pos],
                    power.power[cell - 1, pos],
                ]
            )
    return _write_csv(path, header, rows)


def write_sinr_csv(path, entries) -> Path:
    """entries: iterable of (scheme, antennas, finite report, asymptotic report, targets)."""
    header = [
        "scheme", "antennas", "cell", "user",
        "theta_analytic", "theta_asymptotic", "target", "met",
    ]
    rows = []
    for scheme, m, finite, asymptotic, targets in entries:
        for cell, user, pos in _user_iter(
            targets.num_cells, targets.users_per_cell, targets.input_order
        ):
            met = finite.met[cell - 1, pos] if finite.met is not None else None
            rows.append(
                [
                    scheme,
                    m,
                    cell,
                    user,
                    finite.theta[cell - 1, pos],
                    asymptotic.theta[cell - 1, pos],
                    targets.gamma[cell - 1, pos],
                    met,
                ]
            )
    return _write_csv(path, header, rows)


def write_mc_csv(path, entries) -> Path:
    """entries: iterable of (scheme, MonteCarloReport, analytic theta matrix, targets)."""
    header = [
        "scheme", "antennas", "realizations", "seed", "cell", "user",
        "theta_empirical", "stderr", "theta_analytic", "rel_error",
    ]
    rows = []
    for scheme, report, analytic, targets in entries:
        analytic = np.asarray(analytic)
        for cell, user, pos in _user_iter(
            targets.num_cells, targets.users_per_cell, targets.input_order
        ):
            emp = report.empirical_theta[cell - 1, pos]
            ana = analytic[cell - 1, pos]
            rows.append(
                [
                    scheme,
                    report.antennas,
                    report.realizations,
                    report.seed,
                    cell,
                    user,
                    emp,
                    report.theta_stderr[cell - 1, pos],
                    ana,
                    abs(emp - ana) / ana,
                ]
            )
    return _write_csv(path, header, rows)


def write_minant_csv(path, entries) -> Path:
    """entries: iterable of (scheme, mu, per-user matrix, network value, targets)."""
    header = ["scheme", "mu", "cell", "user", "m_min_user", "m_min_network"]
    rows = []
    for scheme, mu, per_user, network, targets in entries:
        for cell, user, pos in _user_iter(
            targets.num_cells, targets.users_per_cell, targets.input_order
        ):
            rows.append([scheme, mu, cell, user, per_user[cell - 1, pos], network])
    return _write_csv(path, header, rows)


def write_boundary_csv(path, entries) -> Path:
    """entries: iterable of (scheme, (n, 3) surface array)."""
    header = ["scheme", "gamma_a", "gamma_b", "gamma_c"]
    rows = []
    for scheme, surface in entries:
        for ga, gb, gc in np.asarray(surface):
            rows.append([scheme, ga, gb, gc])
    return _write_csv(path, header, rows)


def write_region_csv(path, entries) -> Path:
    """entries: iterable of (scheme, samples, seed, volume, stderr)."""
    header = ["scheme", "samples", "seed", "volume", "stderr"]
    return _write_csv(path, header, entries)


def write_max_sinr_csv(path, rows) -> Path:
    """rows: iterable of (scheme, family, parameter name, value, gamma_max)."""
    header = ["scheme", "family", "parameter", "value", "gamma_max"]
    return _write_csv(path, header, rows)


def write_manifest(path, scenario: Scenario, outputs) -> Path:
    from . import __version__

    payload = {
        "scenario": scenario_to_dict(scenario),
        "scenario_hash": scenario_hash(scenario),
        "tool_version": f"pilotforge {__version__}",
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": sorted(str(o) for o in outputs),
    }
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


_WRITERS = {
    "pilots": write_pilots_csv,
    "alpha": write_alpha_csv,
    "power": write_power_csv,
    "sinr": write_sinr_csv,
    "mc": write_mc_csv,
    "minant": write_minant_csv,
    "boundary": write_boundary_csv,
    "region": write_region_csv,
    "maxsinr": write_max_sinr_csv,
}


def write_tables(results: dict, out_dir, scenario: Scenario | None = None) -> list:
    """Write every prepared table into ``out_dir`` plus the run manifest.

    ``results`` maps a table kind (see the writer table) to the payload its
    writer expects; keys may also be ``(kind, filename)`` pairs to control
    the file name.  Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for key, payload in results.items():
        if isinstance(key, tuple):
            kind, name = key
        else:
            kind, name = key, f"{key}.csv"
        if kind not in _WRITERS:
            raise ValueError(f"unknown table kind {kind!r}")
        args, kwargs = payload if isinstance(payload, tuple) else (payload,), {}
        if isinstance(payload, dict):
            args = (payload["data"],)
            kwargs = {k: v for k, v in payload.items() if k != "data"}
        written.append(_WRITERS[kind](out / name, *args, **kwargs))
    if scenario is not None:
        written.append(
            write_manifest(out / "run.manifest", scenario, [p.name for p in written])
        )
    return written
