"""Baseline pilot books: equal-correlation (WBE) and orthogonal-reuse (FOS).

Both baselines design a single per-cell frame and replicate it across all
cells, so user k in every cell transmits the same pilot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gwbe import design_cell
from .model import PilotBook


@dataclass(frozen=True)
class BaselineMeta:
    """Nominal correlation structure of a baseline book.

    ``reuse_groups`` partitions all K_tot users into groups sharing a pilot,
    as tuples of 1-based (cell, user) pairs.  ``kappa`` is the inverse squared
    nominal correlation (WBE only).  ``max_rho_deviation`` reports how far the
    generated frame's pairwise |rho| strays from the nominal value; it is zero
    only for shapes where an equiangular frame exists (K = tau + 1).
    """

    nominal_rho: float
    kappa: float | None
    reuse_groups: tuple
    max_rho_deviation: float = 0.0


def wbe_meta(users_per_cell: int, pilot_length: int, num_cells: int) -> BaselineMeta:
    """Nominal equal-correlation meta (rho, kappa, reuse groups) without pilots."""
    K, tau, L = users_per_cell, pilot_length, num_cells
    if not tau < K:
        raise ValueError(
            f"unsupported shape: need tau < users_per_cell, got tau={tau}, K={K}"
        )
    nominal = float(np.sqrt((K - tau) / ((K - 1) * tau)))
    groups = tuple(
        tuple((cell, k + 1) for cell in range(1, L + 1)) for k in range(K)
    )
    return BaselineMeta(
        nominal_rho=nominal,
        kappa=float((K - 1) * tau / (K - tau)),
        reuse_groups=groups,
        max_rho_deviation=0.0,
    )


def wbe_pilots(users_per_cell: int, pilot_length: int, num_cells: int):
    """Equal-correlation tight frame per cell, replicated across cells.

    Returns (PilotBook, BaselineMeta).  The nominal correlation is
    ``sqrt((K - tau) / ((K - 1) tau))`` with per-cell K.  For K = tau + 1 the
    frame is the regular simplex and attains the nominal value exactly; for
    larger K the frame is tight but not equiangular and the deviation is
    reported in the meta.
    """
    K, tau, L = users_per_cell, pilot_length, num_cells
    meta = wbe_meta(K, tau, L)

    # equal targets make the capacity-achieving construction emit an
    # equal-weight tight frame; the weight scale drops out
    z_eq = tau / (L * K)
    gamma_eq = np.full(K, z_eq / (1.0 - z_eq))
    frame = design_cell(gamma_eq, tau, L).pilots

    gram = frame.T @ frame
    off = np.abs(gram[~np.eye(K, dtype=bool)])
    deviation = float(np.max(np.abs(off - meta.nominal_rho)))

    sequences = np.hstack([frame] * L)
    book = PilotBook(sequences=sequences, num_cells=L, users_per_cell=K)
    meta = BaselineMeta(
        nominal_rho=meta.nominal_rho,
        kappa=meta.kappa,
        reuse_groups=meta.reuse_groups,
        max_rho_deviation=deviation,
    )
    return book, meta


def fos_pilots(users_per_cell: int, pilot_length: int, num_cells: int):
    """Orthogonal pilots reused cyclically: user k gets basis vector ((k-1) mod tau) + 1."""
    K, tau, L = users_per_cell, pilot_length, num_cells
    if tau < 1:
        raise ValueError("pilot_length must be >= 1")
    frame = np.zeros((tau, K))
    assignment = [(k % tau) for k in range(K)]
    for k, p in enumerate(assignment):
        frame[p, k] = 1.0
    sequences = np.hstack([frame] * L)
    book = PilotBook(sequences=sequences, num_cells=L, users_per_cell=K)

    groups = []
    for p in range(tau):
        members = tuple(
            (cell, k + 1)
            for cell in range(1, L + 1)
            for k in range(K)
            if assignment[k] == p
        )
        if members:
            groups.append(members)
    meta = BaselineMeta(
        nominal_rho=1.0, kappa=None, reuse_groups=tuple(groups), max_rho_deviation=0.0
    )
    return book, meta
