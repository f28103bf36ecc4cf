"""Capacity-achieving pilot construction.

Per cell, the adjusted targets are converted to effective bandwidths
``z_k = gamma_hat_k / (1 + gamma_hat_k)``, a uniform majorant with support
tau is walked down to z by a T-transform chain, and the pilots are the
column-normalized matrix ``sqrt(B) * V * diag(z)^(-1/2)`` with V the first
tau rows of the chain's orthogonal factor and ``B = sum(z) / tau``.  The
construction guarantees the weighted tight-frame identity
``S diag(z) S^T = B I`` that the downlink power allocation relies on.

Cells are designed independently; no coordination between base stations is
required.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .majorize import majorizes, t_transform_chain, uniform_majorant
from .model import FeasibilityError, NetworkConfig, PilotBook, SinrTargets

FRAME_TOL = 1e-8
SUM_TOL = 1e-9


@dataclass(frozen=True)
class CellDesign:
    """Pilots and scaling constants for one cell."""

    pilots: np.ndarray
    b_scale: float
    z_vector: np.ndarray
    gamma_hat_row: np.ndarray


def gamma_hat(gamma_row, tau: int, num_cells: int) -> np.ndarray:
    """Raise per-user targets onto the per-cell capacity boundary.

    The adjusted row dominates the input, stays nonincreasing, keeps every
    entry at or below 1/(L-1), and its effective bandwidths sum exactly to
    tau/L.  Slack is distributed equally in the effective-bandwidth domain,
    clipping at the per-user cap 1/L and re-spreading any clipped excess
    among the uncapped users.

    Raises
    ------
    FeasibilityError
        When the row lies outside the per-cell region (bandwidth sum above
        tau/L) or some target exceeds the 1/(L-1) cap.
    """
    gamma_row = np.asarray(gamma_row, dtype=float)
    if gamma_row.ndim != 1:
        raise ValueError("gamma_row must be a vector")
    K = gamma_row.shape[0]
    L = int(num_cells)
    if L < 1:
        raise ValueError("num_cells must be >= 1")
    if not tau < K:
        raise ValueError(f"pilot length tau={tau} must be below users_per_cell K={K}")
    if np.any(gamma_row <= 0):
        raise ValueError("targets must be > 0")
    if np.any(np.diff(gamma_row) > 1e-12):
        raise ValueError("gamma_row must be nonincreasing")

    budget = tau / L
    z = gamma_row / (1.0 + gamma_row)
    lhs = float(np.sum(z))
    if lhs > budget + 1e-12:
        raise FeasibilityError(
            f"per-cell effective bandwidth {lhs:.4f} > tau/L = {budget:.4f}"
        )
    if L >= 2:
        cap_gamma = 1.0 / (L - 1)
        if gamma_row[0] > cap_gamma + 1e-12:
            raise FeasibilityError(
                f"per-user SINR target {gamma_row[0]:.4f} > 1/(L-1) = {cap_gamma:.4f}"
            )
        z_cap = 1.0 / L
    else:
        # single cell: the cap is inactive; bound z away from 1 so the
        # mapped target stays finite
        z_cap = 1.0 - 1e-9

    z = z.copy()
    free = z < z_cap - 1e-15
    deficit = budget - float(np.sum(z))
    while deficit > 1e-15 and np.any(free):
        z[free] += deficit / int(np.count_nonzero(free))
        over = z > z_cap
        z[over] = z_cap
        free &= ~over
        deficit = budget - float(np.sum(z))
    residual = budget - float(np.sum(z))
    if abs(residual) > 1e-12:
        raise FeasibilityError(
            f"cannot reach the boundary tau/L = {budget:.4f}: all users capped at {z_cap:.4f}"
        )
    if np.any(free) and residual != 0.0:
        z[np.nonzero(free)[0][0]] += residual
    return z / (1.0 - z)


def design_cell(gamma_hat_row, tau: int, num_cells: int) -> CellDesign:
    """Design one cell's tau x K pilot matrix from adjusted targets.

    The row must be nonincreasing and positive with tau < K, and its largest
    effective bandwidth must not exceed B = sum(z)/tau (the majorization
    condition).  Rows produced by :func:`gamma_hat` always qualify.
    """
    gh = np.asarray(gamma_hat_row, dtype=float)
    if gh.ndim != 1:
        raise ValueError("gamma_hat_row must be a vector")
    K = gh.shape[0]
    if not tau < K:
        raise ValueError(
            f"unsupported shape: need pilot length tau < users_per_cell, got tau={tau}, K={K}"
        )
    if np.any(gh <= 0):
        raise ValueError("adjusted targets must be > 0")
    if np.any(np.diff(gh) > 1e-12):
        raise ValueError("gamma_hat_row must be nonincreasing")

    z = gh / (1.0 + gh)
    b_scale = float(np.sum(z)) / tau
    if z[0] > b_scale + 1e-12:
        raise FeasibilityError(
            f"largest effective bandwidth {z[0]:.6f} exceeds B = {b_scale:.6f}; "
            "the uniform majorant cannot majorize this row"
        )

    x = uniform_majorant(z, tau)
    chain = t_transform_chain(x, z)
    pilots = _pilots_from_w(chain.w_matrix, z, b_scale, tau)
    if pilots is None:
        # fall back to the transposed orientation; the tight-frame identity
        # is the arbiter for which row slice the construction meant
        pilots = _pilots_from_w(chain.w_matrix.T, z, b_scale, tau)
    if pilots is None:
        raise RuntimeError("neither orientation of W yields a weighted tight frame")
    pilots.setflags(write=False)
    return CellDesign(pilots=pilots, b_scale=b_scale, z_vector=z, gamma_hat_row=gh)


def _pilots_from_w(w: np.ndarray, z: np.ndarray, b_scale: float, tau: int):
    v = w[:tau, :]
    raw = np.sqrt(b_scale) * v / np.sqrt(z)[None, :]
    norms = np.linalg.norm(raw, axis=0)
    if np.any(norms <= 0):
        return None
    pilots = raw / norms[None, :]
    frame = pilots @ np.diag(z) @ pilots.T
    if np.max(np.abs(frame - b_scale * np.eye(tau))) > FRAME_TOL:
        return None
    return pilots


def design_network(
    targets: SinrTargets, config: NetworkConfig
) -> tuple[PilotBook, SinrTargets]:
    """Design every cell independently and assemble the network pilot book.

    When the caller supplied ``targets.gamma_hat`` it is used verbatim after
    validation (override path); otherwise :func:`gamma_hat` puts each cell on
    the region boundary.  Returns the book plus targets with gamma_hat filled.
    """
    L, K, tau = config.num_cells, config.users_per_cell, config.pilot_length
    if targets.gamma.shape != (L, K):
        raise ValueError(
            f"targets shape {targets.gamma.shape} does not match config {(L, K)}"
        )
    if not tau < K:
        raise ValueError(
            f"unsupported shape: need pilot length tau < users_per_cell, got tau={tau}, K={K}"
        )

    if targets.gamma_hat is not None:
        gh_rows = np.asarray(targets.gamma_hat)
    else:
        rows = []
        for l in range(L):
            try:
                rows.append(gamma_hat(targets.gamma[l], tau, L))
            except FeasibilityError as err:
                raise FeasibilityError(f"cell {l + 1}: {err}") from None
        gh_rows = np.vstack(rows)

    blocks = []
    for l in range(L):
        try:
            blocks.append(design_cell(gh_rows[l], tau, L).pilots)
        except FeasibilityError as err:
            raise FeasibilityError(f"cell {l + 1}: {err}") from None
    sequences = np.hstack(blocks)
    book = PilotBook(sequences=sequences, num_cells=L, users_per_cell=K)
    return book, targets.with_gamma_hat(gh_rows)
