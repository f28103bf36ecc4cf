"""User-capacity bounds, admissibility regions and region geometry.

The admissibility of a set of SINR targets is expressed through effective
bandwidths ``z = gamma / (1 + gamma)``.  Per cell, a scheme admits a target
row when the bandwidth sum stays below its bound:

* capacity-achieving design: ``tau / L`` plus the per-user cap
  ``gamma <= 1 / (L - 1)`` for L >= 2,
* equal-correlation (WBE) baseline:
  ``min(tau / L, kappa / L + (1 - kappa) z_max)`` with
  ``kappa = (K - 1) tau / (K - tau)``,
* orthogonal-reuse (FOS) baseline: ``min(tau / L, 1 / L)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .baselines import BaselineMeta
from .model import PilotBook, SinrTargets

SCHEMES = ("gwbe", "wbe", "fos")
BOUND_SLACK = 1e-12


def _check_scheme(scheme: str) -> str:
    s = scheme.lower()
    if s not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return s


def effective_bandwidth(gamma):
    """Fraction of pilot degrees of freedom consumed by a target: gamma/(1+gamma)."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SINR values must be >= 0")
    out = g / (1.0 + g)
    return float(out) if np.isscalar(gamma) or out.ndim == 0 else out


def user_capacity_bound(targets, tau: int):
    """Upper bound on how many users the network can serve at their targets.

    Returns ``(bound, admissible)`` where ``bound = sqrt(tau * sum (1 +
    gamma) / gamma)`` over all users and ``admissible`` says whether the
    actual user count stays within it.
    """
    gamma = targets.gamma if isinstance(targets, SinrTargets) else np.asarray(targets, dtype=float)
    if np.any(gamma == 0):
        raise ValueError("zero SINR target makes the capacity bound diverge")
    if np.any(gamma < 0):
        raise ValueError("SINR targets must be > 0")
    bound = float(np.sqrt(tau * np.sum((1.0 + gamma) / gamma)))
    return bound, gamma.size <= bound + BOUND_SLACK


@dataclass(frozen=True)
class RegionCheck:
    """Outcome of one cell's admissibility test."""

    scheme: str
    satisfied: bool
    lhs: float
    bound: float
    cap_violations: tuple


def _row_bound(scheme: str, row_z_sum, row_z_max, tau: int, L: int, kappa):
    budget = tau / L
    if scheme == "gwbe":
        return budget
    if scheme == "fos":
        return min(budget, 1.0 / L)
    return np.minimum(budget, kappa / L + (1.0 - kappa) * row_z_max)


def region_check(
    targets: SinrTargets,
    tau: int,
    scheme: str,
    meta: BaselineMeta | None = None,
) -> list[RegionCheck]:
    """Per-cell admissibility of the targets under one scheme's region bound."""
    scheme = _check_scheme(scheme)
    if scheme == "wbe":
        if meta is None or meta.kappa is None:
            raise ValueError("region_check for the WBE scheme requires meta with kappa")
        kappa = meta.kappa
    else:
        kappa = None
    L, K = targets.num_cells, targets.users_per_cell
    z = targets.gamma / (1.0 + targets.gamma)
    checks = []
    for l in range(L):
        lhs = float(np.sum(z[l]))
        bound = float(_row_bound(scheme, lhs, float(np.max(z[l])), tau, L, kappa))
        cap_violations = ()
        if scheme == "gwbe" and L >= 2:
            cap = 1.0 / (L - 1)
            bad = np.nonzero(targets.gamma[l] > cap + BOUND_SLACK)[0]
            cap_violations = tuple(
                (l + 1, int(targets.input_order[l, p]) + 1) for p in bad
            )
        satisfied = lhs <= bound + BOUND_SLACK and not cap_violations
        checks.append(
            RegionCheck(
                scheme=scheme,
                satisfied=satisfied,
                lhs=lhs,
                bound=bound,
                cap_violations=cap_violations,
            )
        )
    return checks


def sinr_pattern(family: str, users_per_cell: int, omega: float | None = None) -> Callable:
    """Parametrized target-row families used by the sweep experiments.

    ``fig3``: three users at gamma, the remaining K-3 at gamma/3.
    ``fig4``: K = 5 with [gamma, gamma, gamma, omega*gamma, omega*gamma].
    ``fig5``: K = 5 with [gamma, gamma, gamma/3, gamma/3, gamma/3].
    The returned callable maps gamma to a nonincreasing row.
    """
    K = users_per_cell
    if family == "fig3":
        if K < 4:
            raise ValueError("fig3 family needs users_per_cell >= 4")

        def row(gamma):
            return np.array([gamma] * 3 + [gamma / 3.0] * (K - 3))

    elif family == "fig4":
        if K != 5:
            raise ValueError("fig4 family is defined for users_per_cell = 5")
        if omega is None or omega <= 0:
            raise ValueError("fig4 family needs omega > 0")

        def row(gamma):
            vals = np.array([gamma, gamma, gamma, omega * gamma, omega * gamma])
            return np.sort(vals)[::-1]

    elif family == "fig5":
        if K != 5:
            raise ValueError("fig5 family is defined for users_per_cell = 5")

        def row(gamma):
            return np.array([gamma] * 2 + [gamma / 3.0] * 3)

    else:
        raise ValueError(f"unknown pattern family {family!r}")
    return row


def _row_admissible(row, scheme, tau, L, kappa) -> bool:
    z = row / (1.0 + row)
    lhs = float(np.sum(z))
    bound = float(_row_bound(scheme, lhs, float(np.max(z)), tau, L, kappa))
    if lhs > bound + BOUND_SLACK:
        return False
    if scheme == "gwbe" and L >= 2 and np.max(row) > 1.0 / (L - 1) + BOUND_SLACK:
        return False
    return True


def max_sinr_solve(
    pattern: Callable,
    scheme: str,
    tau: int,
    num_cells: int,
    meta: BaselineMeta | None = None,
    tol: float = 1e-6,
    gamma_limit: float = 1e3,
) -> float:
    """Largest gamma keeping ``pattern(gamma)`` inside the per-cell region.

    Solved by bisection to an absolute tolerance ``tol``; the search interval
    is [0, 1/(L-1)] for the capacity-achieving design (``gamma_limit`` when
    L = 1) and grows geometrically for the baselines until infeasible.
    """
    scheme = _check_scheme(scheme)
    L = num_cells
    if scheme == "wbe":
        if meta is None or meta.kappa is None:
            raise ValueError("max_sinr_solve for the WBE scheme requires meta with kappa")
        kappa = meta.kappa
    else:
        kappa = None

    def feasible(g: float) -> bool:
        return _row_admissible(np.asarray(pattern(g), dtype=float), scheme, tau, L, kappa)

    lo = tol * 1e-3
    if not feasible(lo):
        raise ValueError("pattern is infeasible even for vanishing SINR targets")

    if scheme == "gwbe":
        hi = 1.0 / (L - 1) if L >= 2 else gamma_limit
        if feasible(hi):
            return hi
    else:
        hi = 1.0
        while feasible(hi):
            hi *= 2.0
            if hi > 1e9:
                raise ValueError("region appears unbounded along this pattern")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def boundary_surface(
    scheme: str,
    tau: int,
    num_cells: int,
    fixed_tail,
    gamma_a_values,
    gamma_b_values,
    meta: BaselineMeta | None = None,
) -> np.ndarray:
    """Boundary of the per-cell region solved for a third user's target.

    For every (gamma_a, gamma_b) grid point, solves the scheme's boundary
    equality for gamma_c given the remaining users fixed at ``fixed_tail``.
    Rows are (gamma_a, gamma_b, gamma_c) with NaN where no nonnegative
    finite solution exists.
    """
    scheme = _check_scheme(scheme)
    L = num_cells
    if scheme == "wbe":
        if meta is None or meta.kappa is None:
            raise ValueError("boundary_surface for the WBE scheme requires meta with kappa")
        kappa = meta.kappa
    tail = np.asarray(fixed_tail, dtype=float)
    z_tail_sum = float(np.sum(tail / (1.0 + tail))) if tail.size else 0.0
    z_tail_max = float(np.max(tail / (1.0 + tail))) if tail.size else 0.0
    budget = tau / L

    rows = []
    for ga in np.asarray(gamma_a_values, dtype=float):
        za = ga / (1.0 + ga)
        for gb in np.asarray(gamma_b_values, dtype=float):
            zb = gb / (1.0 + gb)
            known = za + zb + z_tail_sum
            if scheme == "gwbe":
                zc = budget - known
            elif scheme == "fos":
                zc = min(budget, 1.0 / L) - known
            else:
                zc = _wbe_boundary_z(known, max(za, zb, z_tail_max), budget, kappa, L)
            if zc is None or zc < -BOUND_SLACK or zc >= 1.0:
                gc = np.nan
            else:
                zc = max(zc, 0.0)
                gc = zc / (1.0 - zc)
            rows.append((float(ga), float(gb), gc))
    return np.array(rows)


def _wbe_boundary_z(z_known_sum, z_known_max, budget, kappa, L):
    """Largest z_c with z_known_sum + z_c <= min(budget, kappa/L + (1-kappa) z_max)."""

    def slack(zc):
        zmax = max(z_known_max, zc)
        return min(budget, kappa / L + (1.0 - kappa) * zmax) - z_known_sum - zc

    if slack(0.0) < -BOUND_SLACK:
        return None
    if slack(1.0) >= 0.0:
        return 1.0  # boundary beyond any finite target
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if slack(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def admissible_mask(
    scheme: str,
    gamma_free: np.ndarray,
    fixed_tail,
    tau: int,
    num_cells: int,
    meta: BaselineMeta | None = None,
) -> np.ndarray:
    """Vectorized per-cell admissibility for rows of free targets plus a fixed tail."""
    scheme = _check_scheme(scheme)
    L = num_cells
    g = np.asarray(gamma_free, dtype=float)
    if g.ndim != 2:
        raise ValueError("gamma_free must be (num_samples, num_free_users)")
    tail = np.asarray(fixed_tail, dtype=float)
    if g.shape[1] == 0 and tail.size == 0:
        raise ValueError("need at least one free or fixed target")
    z = g / (1.0 + g)
    z_tail = tail / (1.0 + tail) if tail.size else np.zeros(0)
    lhs = z.sum(axis=1) + float(np.sum(z_tail))
    g_max = g.max(axis=1) if g.shape[1] else np.zeros(g.shape[0])
    budget = tau / L
    if scheme == "gwbe":
        ok = lhs <= budget + BOUND_SLACK
        if L >= 2:
            cap = 1.0 / (L - 1)
            if tail.size and np.max(tail) > cap + BOUND_SLACK:
                return np.zeros(g.shape[0], dtype=bool)
            ok &= g_max <= cap + BOUND_SLACK
        return ok
    if scheme == "fos":
        return lhs <= min(budget, 1.0 / L) + BOUND_SLACK
    if meta is None or meta.kappa is None:
        raise ValueError("admissible_mask for the WBE scheme requires meta with kappa")
    zmax = g_max / (1.0 + g_max)
    if z_tail.size:
        zmax = np.maximum(zmax, float(np.max(z_tail)))
    bound = np.minimum(budget, meta.kappa / L + (1.0 - meta.kappa) * zmax)
    return lhs <= bound + BOUND_SLACK


def region_volume(
    scheme: str,
    num_cells: int,
    users_per_cell: int,
    tau: int,
    fixed_tail,
    samples: int,
    seed: int,
    meta: BaselineMeta | None = None,
):
    """Monte Carlo volume of the admissible set over the free-target box.

    The free targets (those not pinned by ``fixed_tail``) are sampled
    uniformly over ``[0, 1/(L-1)]``.  Returns ``(volume, stderr)``;
    deterministic for a fixed seed.
    """
    scheme = _check_scheme(scheme)
    L, K = num_cells, users_per_cell
    if L < 2:
        raise ValueError("region_volume needs num_cells >= 2 to bound the sample box")
    tail = np.asarray(fixed_tail, dtype=float)
    d = K - tail.size
    if d < 0:
        raise ValueError("fixed_tail longer than users_per_cell")
    cap = 1.0 / (L - 1)
    box = cap**d
    if d == 0:
        # degenerate box: the fixed point is either in or out
        ok = bool(admissible_mask(scheme, np.zeros((1, 0)), tail, tau, L, meta)[0])
        return (1.0 if ok else 0.0), 0.0
    rng = np.random.default_rng(seed)
    draws = rng.uniform(0.0, cap, size=(int(samples), d))
    mask = admissible_mask(scheme, draws, tail, tau, L, meta)
    p = float(np.mean(mask))
    stderr = box * float(np.sqrt(p * (1.0 - p) / samples))
    return box * p, stderr


def welch_trace_bound(pilots: PilotBook):
    """Trace bound on the squared Gram of a unit-norm pilot book.

    Returns ``(lhs, rhs, holds)`` with ``lhs = tr(Gram^2)`` and
    ``rhs = K_tot^2 / tau``; rank-tau Grams with unit diagonal always satisfy
    ``lhs >= rhs``, with equality exactly for tight frames.
    """
    lhs = float(np.sum(pilots.gram**2))
    rhs = pilots.num_users_total**2 / pilots.pilot_length
    return lhs, rhs, lhs >= rhs - 1e-9


def weighted_welch_trace(sequences: np.ndarray, weights) -> tuple[float, float]:
    """Weighted-Gram analogue of the trace identity for weighted tight frames.

    For a tau x K frame S with positive weights z, returns
    ``(tr((S Z S^T)^2), (sum z)^2 / tau)``.  The two coincide exactly when
    ``S Z S^T`` is a multiple of the identity, which the capacity-achieving
    construction guarantees per cell.
    """
    s = np.asarray(sequences, dtype=float)
    z = np.asarray(weights, dtype=float)
    if z.ndim != 1 or s.shape[1] != z.shape[0]:
        raise ValueError("weights must match the number of columns")
    if np.any(z <= 0):
        raise ValueError("weights must be > 0")
    m = s @ np.diag(z) @ s.T
    lhs = float(np.sum(m**2))
    rhs = float(np.sum(z)) ** 2 / s.shape[0]
    return lhs, rhs
