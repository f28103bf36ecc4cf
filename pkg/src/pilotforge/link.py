"""Closed-form downlink SINR analysis for MRT precoding on LS channel estimates.

Conventions follow the shared tensors: ``rho2[l, k, m, n]`` is the squared
correlation between the pilots of user (l, k) and user (m, n), and the
interference a stream (m, n) leaks onto user (l, k) is weighted by
``rho2 * xi_squared[l, k, m] * beta[l, k, m] * P[m, n] / alpha[m, n]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .baselines import BaselineMeta
from .model import NetworkConfig, PilotBook, PowerAllocation, SinrTargets

MET_SLACK = 1e-12


@dataclass(frozen=True)
class SinrReport:
    """Per-user SINR, rate and target satisfaction at a given antenna count."""

    theta: np.ndarray
    antennas: float
    rates: np.ndarray
    met: np.ndarray | None = None


def _rho2(book: PilotBook) -> np.ndarray:
    L, K = book.num_cells, book.users_per_cell
    return (book.gram**2).reshape(L, K, L, K)


def _beta_own(config: NetworkConfig) -> np.ndarray:
    idx = np.arange(config.num_cells)
    return config.beta[idx, :, idx]


def compute_alpha(book: PilotBook, config: NetworkConfig) -> np.ndarray:
    """Per-antenna second moment of every LS estimate.

    ``alpha[l, k]`` sums ``rho^2 * xi_squared`` over all users (the self term
    contributes 1) plus the uplink noise power.
    """
    L, K = config.num_cells, config.users_per_cell
    if (book.num_cells, book.users_per_cell) != (L, K) or book.pilot_length != config.pilot_length:
        raise ValueError("pilot book dimensions do not match the network config")
    rho2 = _rho2(book)
    alpha = np.einsum("ijlk,ijl->lk", rho2, config.xi_squared) + config.uplink_noise_power
    # the self term (rho = 1, xi^2 = 1) plus noise is a hard floor
    assert np.all(alpha >= config.uplink_noise_power + 1.0 - 1e-9)
    return alpha


def allocate_power(alpha: np.ndarray, targets: SinrTargets, scheme: str) -> PowerAllocation:
    """Downlink powers proportional to effective bandwidth: P = alpha * z.

    The capacity-achieving scheme spends power on the adjusted targets
    (``targets.gamma_hat`` must be present); the baselines use the raw
    targets, and the WBE baseline applies one common alpha to every user.
    """
    scheme = scheme.lower()
    alpha = np.asarray(alpha, dtype=float)
    if scheme == "gwbe":
        if targets.gamma_hat is None:
            raise ValueError("power allocation for the capacity-achieving scheme needs gamma_hat")
        z = targets.gamma_hat / (1.0 + targets.gamma_hat)
        power = alpha * z
    elif scheme == "wbe":
        z = targets.gamma / (1.0 + targets.gamma)
        power = float(np.mean(alpha)) * z
    elif scheme == "fos":
        z = targets.gamma / (1.0 + targets.gamma)
        power = alpha * z
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return PowerAllocation(power=power, alpha=alpha)


def _interference(book, power, config, include_self: bool):
    rho2 = _rho2(book)
    z = power.power / power.alpha
    full = np.einsum(
        "lkmn,lkm,lkm,mn->lk", rho2, config.xi_squared, config.beta, z
    )
    if include_self:
        return full
    return full - _beta_own(config) * z


def _power_load(power, config) -> np.ndarray:
    return (
        np.einsum("lkm,mn->lk", config.beta, power.power)
        + config.downlink_noise_power
    )


def sinr_finite(
    book: PilotBook,
    power: PowerAllocation,
    config: NetworkConfig,
    antennas: int,
    targets: SinrTargets | None = None,
) -> SinrReport:
    """Achievable SINR with a finite antenna count.

    theta = beta_own P / (alpha * I + alpha / M * Pbar) where I excludes the
    user's own stream and Pbar sums beta-weighted powers over every stream
    plus receiver noise.
    """
    if antennas < 1:
        raise ValueError("antenna count must be >= 1")
    interfere = _interference(book, power, config, include_self=False)
    pbar = _power_load(power, config)
    beta_own = _beta_own(config)
    theta = beta_own * power.power / (
        power.alpha * interfere + power.alpha / antennas * pbar
    )
    return _report(theta, float(antennas), targets)


def sinr_asymptotic(
    book: PilotBook,
    power: PowerAllocation,
    config: NetworkConfig,
    targets: SinrTargets | None = None,
) -> SinrReport:
    """Pilot-contamination-limited SINR in the infinite-antenna regime.

    Users with no contamination at all are reported as infinite.
    """
    full = _interference(book, power, config, include_self=True)
    beta_own = _beta_own(config)
    num = beta_own * power.power
    denom = power.alpha * full - num
    theta = np.full_like(num, np.inf)
    positive = denom > 1e-15
    theta[positive] = num[positive] / denom[positive]
    return _report(theta, float("inf"), targets)


def _report(theta, antennas, targets):
    rates = np.log2(1.0 + theta)
    met = None
    if targets is not None:
        met = theta >= targets.gamma - MET_SLACK
    return SinrReport(theta=theta, antennas=antennas, rates=rates, met=met)


def min_antennas(
    book: PilotBook,
    power: PowerAllocation,
    config: NetworkConfig,
    mu: float,
):
    """Smallest antenna counts delivering the fraction mu of the asymptotic SINR.

    Returns ``(per_user, network)`` where per-user counts are rounded up to
    integers and the network value is their maximum.  Users without any
    contamination already sit at their asymptotic SINR and get 1.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("the performance satisfaction index mu must lie in (0, 1)")
    interfere = _interference(book, power, config, include_self=False)
    pbar = _power_load(power, config)
    factor = (1.0 - mu) / mu
    per_user = np.ones(interfere.shape, dtype=int)
    loaded = interfere > 1e-15
    need = pbar[loaded] / (factor * interfere[loaded])
    per_user[loaded] = np.maximum(1, np.ceil(need - 1e-9).astype(int))
    return per_user, int(per_user.max())


def min_antennas_wbe_closed_form(
    power: PowerAllocation,
    config: NetworkConfig,
    mu: float,
    meta: BaselineMeta,
):
    """Equal-correlation closed form for the minimum antenna counts.

    Evaluates the nominal structure: unit correlation within each reuse group
    and 1/kappa squared correlation across groups, with the common alpha.
    Serves as an independent cross-check of :func:`min_antennas`.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    if meta.kappa is None:
        raise ValueError("meta.kappa required for the equal-correlation closed form")
    L, K = config.num_cells, config.users_per_cell
    alpha_common = float(np.mean(power.alpha))
    pbar = _power_load(power, config)
    group_of = _group_lookup(meta, L, K)
    per_user = np.ones((L, K), dtype=int)
    factor = (1.0 - mu) / (alpha_common * mu)
    for l in range(L):
        for k in range(K):
            same = 0.0
            other = 0.0
            for m in range(L):
                for n in range(K):
                    w = config.xi_squared[l, k, m] * config.beta[l, k, m] * power.power[m, n]
                    if group_of[m, n] == group_of[l, k]:
                        same += w
                    else:
                        other += w
            inner = same + other / meta.kappa - config.beta[l, k, l] * power.power[l, k]
            if inner <= 1e-15:
                continue
            per_user[l, k] = max(1, ceil(pbar[l, k] / (factor * inner) - 1e-9))
    return per_user, int(per_user.max())


def min_antennas_fos_closed_form(
    power: PowerAllocation,
    config: NetworkConfig,
    mu: float,
    meta: BaselineMeta,
):
    """Orthogonal-reuse closed form: only same-pilot users interfere.

    The user's own stream is removed from its reuse-group sum with its
    1/alpha weighting kept, matching the generic interference accounting.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    L, K = config.num_cells, config.users_per_cell
    pbar = _power_load(power, config)
    group_of = _group_lookup(meta, L, K)
    z = power.power / power.alpha
    per_user = np.ones((L, K), dtype=int)
    factor = (1.0 - mu) / mu
    for l in range(L):
        for k in range(K):
            total = 0.0
            for m in range(L):
                for n in range(K):
                    if group_of[m, n] == group_of[l, k]:
                        total += config.xi_squared[l, k, m] * config.beta[l, k, m] * z[m, n]
            inner = total - config.beta[l, k, l] * z[l, k]
            if inner <= 1e-15:
                continue
            per_user[l, k] = max(1, ceil(pbar[l, k] / (factor * inner) - 1e-9))
    return per_user, int(per_user.max())


def _group_lookup(meta: BaselineMeta, L: int, K: int) -> np.ndarray:
    lookup = np.full((L, K), -1, dtype=int)
    for gid, members in enumerate(meta.reuse_groups):
        for cell, user in members:
            lookup[cell - 1, user - 1] = gid
    if np.any(lookup < 0):
        raise ValueError("reuse_groups do not cover every user")
    return lookup
