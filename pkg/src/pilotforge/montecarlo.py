"""Link-level simulation of uplink training and downlink transmission.

Draws i.i.d. Rayleigh block-fading channels, forms contaminated LS channel
estimates from the shared per-BS training noise, applies the
hardening-normalized MRT precoder and estimates every user's SINR from
sample moments of the effective channel gains.  Realization r draws from an
RNG stream keyed by (seed, r), so results are reproducible and independent
of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NetworkConfig, PilotBook, PowerAllocation, UserIndex


@dataclass(frozen=True)
class ChannelRealization:
    """One coherence block: small-scale channels and per-BS training noise.

    ``h[i, j, l]`` is the M-vector from user (i, j) to base station l with
    i.i.d. standard complex Gaussian entries; ``uplink_noise[l]`` is the
    tau x M noise block at base station l.
    """

    h: np.ndarray
    uplink_noise: np.ndarray


def draw_realization(config: NetworkConfig, antennas: int, rng) -> ChannelRealization:
    L, K, tau = config.num_cells, config.users_per_cell, config.pilot_length
    raw = rng.standard_normal((L, K, L, antennas, 2))
    h = (raw[..., 0] + 1j * raw[..., 1]) / np.sqrt(2.0)
    raw_n = rng.standard_normal((L, tau, antennas, 2))
    noise = np.sqrt(config.uplink_noise_power / 2.0) * (raw_n[..., 0] + 1j * raw_n[..., 1])
    return ChannelRealization(h=h, uplink_noise=noise)


def ls_estimate(
    realization: ChannelRealization,
    book: PilotBook,
    config: NetworkConfig,
    target: UserIndex,
) -> np.ndarray:
    """Contaminated LS estimate of the target user's channel at its own BS."""
    L, K = config.num_cells, config.users_per_cell
    M = realization.h.shape[-1]
    if realization.h.shape != (L, K, L, M):
        raise ValueError("realization dimensions do not match the config")
    l = target.cell - 1
    k = target.user - 1
    flat = l * K + k
    # correlation times uplink amplitude for every contributing user,
    # self term included (rho = 1, amplitude 1)
    coeff = book.gram[:, flat].reshape(L, K) * np.sqrt(config.xi_squared[:, :, l])
    est = np.einsum("ij,ijm->m", coeff, realization.h[:, :, l, :])
    est = est + book.sequences[:, flat] @ realization.uplink_noise[l]
    return est


def mrt_precoder(estimate: np.ndarray, alpha: float, antennas: int) -> np.ndarray:
    """Hardening-normalized MRT beam: estimate / sqrt(M alpha)."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    return estimate / np.sqrt(antennas * alpha)


@dataclass(frozen=True)
class MonteCarloReport:
    """Empirical per-user SINR statistics with provenance."""

    empirical_theta: np.ndarray
    theta_stderr: np.ndarray
    mean_g: np.ndarray
    var_g: np.ndarray
    interferer_power: np.ndarray
    realizations: int
    seed: int
    antennas: int


def simulate(
    config: NetworkConfig,
    book: PilotBook,
    power: PowerAllocation,
    antennas: int,
    realizations: int,
    seed: int,
    batches: int = 10,
) -> MonteCarloReport:
    """Estimate every user's downlink SINR from simulated coherence blocks.

    The SINR estimator uses |mean g|^2 as the useful-signal coefficient, the
    complex sample variance of g for self-fluctuation, and mean |g_mn|^2 per
    interfering stream.  ``theta_stderr`` comes from disjoint batch means.
    """
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    L, K, tau, M = config.num_cells, config.users_per_cell, config.pilot_length, int(antennas)
    ktot = L * K

    gram4 = book.gram.reshape(L, K, L, K)
    xi = np.sqrt(config.xi_squared)
    # coeff[l, k, flat(i, j)]: contamination weight of user (i, j) in the
    # estimate BS l forms for its user k
    coeff = (gram4 * xi[:, :, :, None]).transpose(2, 3, 0, 1).reshape(L, K, ktot)
    pilots_t = np.stack([book.cell_block(l + 1).T for l in range(L)])  # (L, K, tau)
    scale = 1.0 / np.sqrt(M * power.alpha)  # (L, K)

    nbatch = max(1, min(batches, realizations))
    sum_g = np.zeros((nbatch, L, K), dtype=complex)
    sum_g2 = np.zeros((nbatch, L, K))
    sum_int = np.zeros((nbatch, L, K, L, K))
    counts = np.zeros(nbatch, dtype=int)

    own_rows = np.arange(ktot)  # flat(l, k) enumerated cell-major
    own_cells = own_rows // K
    own_users = own_rows % K

    for r in range(realizations):
        rng = np.random.default_rng([int(seed), r])
        real = draw_realization(config, M, rng)
        h_by_bs = real.h.transpose(2, 0, 1, 3).reshape(L, ktot, M)
        gains = np.empty((L, ktot, K), dtype=complex)
        for l in range(L):
            est = coeff[l] @ h_by_bs[l] + pilots_t[l] @ real.uplink_noise[l]
            beams = est * scale[l][:, None]
            gains[l] = h_by_bs[l].conj() @ beams.T
        # gains[m, flat(l, k), n] = h_lkm^H t_mn -> (L, K, L, K)
        int2 = np.abs(gains.transpose(1, 0, 2)).reshape(L, K, L, K) ** 2
        g_own = gains[own_cells, own_rows, own_users].reshape(L, K)

        b = r * nbatch // realizations
        sum_g[b] += g_own
        sum_g2[b] += np.abs(g_own) ** 2
        sum_int[b] += int2
        counts[b] += 1

    tot_g = sum_g.sum(axis=0)
    tot_g2 = sum_g2.sum(axis=0)
    tot_int = sum_int.sum(axis=0)
    R = realizations
    mean_g = tot_g / R
    if R > 1:
        var_g = (tot_g2 - R * np.abs(mean_g) ** 2) / (R - 1)
    else:
        var_g = np.zeros((L, K))
    var_g = np.maximum(var_g, 0.0)
    int_mean = tot_int / R
    theta = _theta_from_moments(mean_g, var_g, int_mean, power, config)

    if nbatch >= 2 and np.all(counts >= 2):
        per_batch = np.empty((nbatch, L, K))
        for b in range(nbatch):
            n = counts[b]
            mg = sum_g[b] / n
            vg = np.maximum((sum_g2[b] - n * np.abs(mg) ** 2) / (n - 1), 0.0)
            per_batch[b] = _theta_from_moments(mg, vg, sum_int[b] / n, power, config)
        stderr = per_batch.std(axis=0, ddof=1) / np.sqrt(nbatch)
    else:
        stderr = np.full((L, K), np.nan)

    return MonteCarloReport(
        empirical_theta=theta,
        theta_stderr=stderr,
        mean_g=mean_g,
        var_g=var_g,
        interferer_power=int_mean,
        realizations=realizations,
        seed=int(seed),
        antennas=M,
    )


def _theta_from_moments(mean_g, var_g, int_mean, power, config):
    L = config.num_cells
    idx = np.arange(L)
    beta_own = config.beta[idx, :, idx]
    signal = np.abs(mean_g) ** 2 * beta_own * power.power
    cross = np.einsum("lkmn,lkm,mn->lk", int_mean, config.beta, power.power)
    own_leak = np.einsum("lklk->lk", int_mean) * beta_own * power.power
    denom = (
        var_g * beta_own * power.power
        + (cross - own_leak)
        + config.downlink_noise_power
    )
    return signal / denom
