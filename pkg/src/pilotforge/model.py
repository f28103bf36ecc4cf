"""Shared domain types and index conventions.

All other modules operate on the immutable containers defined here: the
network geometry and propagation tensors (:class:`NetworkConfig`), per-user
SINR requirements (:class:`SinrTargets`), the pilot matrix with its Gram
(:class:`PilotBook`) and downlink powers (:class:`PowerAllocation`).

Index conventions
-----------------
Cells and users are 1-based in the public API (``UserIndex``, flat indices,
CSV output) and 0-based inside numpy arrays.  Users are flattened cell-major:
the column of user (l, k) in a pilot matrix is ``(l - 1) * K + k`` (1-based).

Propagation tensors are indexed ``[i, j, l]`` = (source cell, source user,
receiving base station), so ``xi_squared[i, j, l]`` is the product of uplink
pilot power and large-scale gain from user (i, j) to base station l, and
``beta[i, j, l]`` is the large-scale gain alone (used on the downlink).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

UNIT_NORM_TOL = 1e-9


class FeasibilityError(ValueError):
    """SINR targets violate a capacity bound; the message names the bound."""


class DegeneratePivotError(RuntimeError):
    """A transform pivot has numerically equal endpoints (violated precondition)."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NetworkConfig:
    """Static description of an L-cell network with K single-antenna users per cell.

    Parameters
    ----------
    num_cells, users_per_cell, pilot_length : int
        L, K and the pilot length tau.
    uplink_noise_power, downlink_noise_power : float
        Noise variances at the base station and at the users.
    xi_squared : array (L, K, L)
        Uplink power times large-scale gain per (source cell, user, BS).
        Uplink power control pins the same-cell entries to 1 and every entry
        lies in (0, 1].
    beta : array (L, K, L)
        Downlink large-scale gains, strictly positive.
    """

    num_cells: int
    users_per_cell: int
    pilot_length: int
    uplink_noise_power: float
    downlink_noise_power: float
    xi_squared: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        L, K, tau = self.num_cells, self.users_per_cell, self.pilot_length
        for name, v in (("num_cells", L), ("users_per_cell", K), ("pilot_length", tau)):
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.uplink_noise_power <= 0 or self.downlink_noise_power <= 0:
            raise ValueError("noise powers must be > 0")
        xi2 = _frozen_array(self.xi_squared)
        beta = _frozen_array(self.beta)
        if xi2.shape != (L, K, L) or beta.shape != (L, K, L):
            raise ValueError(
                f"propagation tensors must have shape {(L, K, L)}, "
                f"got xi_squared {xi2.shape} and beta {beta.shape}"
            )
        if np.any(xi2 <= 0) or np.any(xi2 > 1 + 1e-12):
            raise ValueError("xi_squared entries must lie in (0, 1]")
        same_cell = xi2[np.arange(L), :, np.arange(L)]
        if not np.allclose(same_cell, 1.0, atol=1e-12):
            raise ValueError("uplink power control requires xi_squared[l, j, l] = 1")
        if np.any(beta <= 0):
            raise ValueError("beta entries must be > 0")
        object.__setattr__(self, "xi_squared", xi2)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def uniform(
        cls,
        num_cells: int,
        users_per_cell: int,
        pilot_length: int,
        *,
        xi2_cross: float = 0.9,
        beta_cross: float = 0.9,
        sigma_z2: float = 1.0,
        sigma_w2: float = 1.0,
    ) -> "NetworkConfig":
        """Config with same-cell gains of 1 and a common cross-cell attenuation."""
        L, K = num_cells, users_per_cell
        xi2 = np.full((L, K, L), float(xi2_cross))
        beta = np.full((L, K, L), float(beta_cross))
        idx = np.arange(L)
        xi2[idx, :, idx] = 1.0
        beta[idx, :, idx] = 1.0
        return cls(L, K, pilot_length, sigma_z2, sigma_w2, xi2, beta)

    @property
    def num_users_total(self) -> int:
        return self.num_cells * self.users_per_cell


@dataclass(frozen=True)
class SinrTargets:
    """Per-cell SINR requirement rows, stored sorted nonincreasing.

    ``gamma`` rows are sorted at construction with a stable descending sort;
    ``input_order[l, p]`` records the original (0-based) position of the user
    now at sorted position p, so results can be reported in input order.
    ``gamma_hat`` holds adjusted targets once computed (or a caller override)
    and is aligned with the sorted rows.
    """

    gamma: np.ndarray
    gamma_hat: np.ndarray | None = None
    input_order: np.ndarray | None = None

    def __post_init__(self):
        gamma = _frozen_array(self.gamma)
        if gamma.ndim != 2:
            raise ValueError("gamma must be an L x K matrix")
        if np.any(gamma <= 0):
            raise ValueError("all SINR targets must be > 0")
        if np.any(np.diff(gamma, axis=1) > 1e-12):
            raise ValueError("gamma rows must be nonincreasing; use from_rows() to sort")
        order = self.input_order
        if order is None:
            order = np.tile(np.arange(gamma.shape[1]), (gamma.shape[0], 1))
        order = _frozen_array(order, dtype=int)
        if order.shape != gamma.shape:
            raise ValueError("input_order shape must match gamma")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "input_order", order)
        if self.gamma_hat is not None:
            gh = _frozen_array(self.gamma_hat)
            self._validate_gamma_hat(gamma, gh)
            object.__setattr__(self, "gamma_hat", gh)

    @staticmethod
    def _validate_gamma_hat(gamma: np.ndarray, gamma_hat: np.ndarray) -> None:
        L = gamma.shape[0]
        if gamma_hat.shape != gamma.shape:
            raise ValueError("gamma_hat shape must match gamma")
        if np.any(gamma_hat < gamma - 1e-12):
            raise ValueError("gamma_hat must dominate gamma elementwise")
        if np.any(np.diff(gamma_hat, axis=1) > 1e-12):
            raise ValueError("gamma_hat rows must be nonincreasing")
        if L >= 2:
            cap = 1.0 / (L - 1)
            if np.any(gamma_hat > cap + 1e-12):
                raise ValueError(
                    f"gamma_hat exceeds the per-user cap 1/(L-1) = {cap:.6g}"
                )

    @classmethod
    def from_rows(cls, rows, gamma_hat=None) -> "SinrTargets":
        """Build targets from possibly unsorted rows, recording the permutation.

        A supplied ``gamma_hat`` is interpreted in the same user order as
        ``rows`` and is permuted identically.
        """
        gamma_in = np.asarray(rows, dtype=float)
        if gamma_in.ndim != 2:
            raise ValueError("rows must form an L x K matrix")
        order = np.argsort(-gamma_in, axis=1, kind="stable")
        gamma = np.take_along_axis(gamma_in, order, axis=1)
        gh = None
        if gamma_hat is not None:
            gh = np.take_along_axis(np.asarray(gamma_hat, dtype=float), order, axis=1)
        return cls(gamma=gamma, gamma_hat=gh, input_order=order)

    def with_gamma_hat(self, gamma_hat) -> "SinrTargets":
        """Copy with ``gamma_hat`` (aligned to the sorted rows) filled in."""
        return SinrTargets(
            gamma=self.gamma, gamma_hat=gamma_hat, input_order=self.input_order
        )

    @property
    def num_cells(self) -> int:
        return self.gamma.shape[0]

    @property
    def users_per_cell(self) -> int:
        return self.gamma.shape[1]


@dataclass(frozen=True)
class PilotBook:
    """Pilot matrix for the whole network, one unit-norm real column per user.

    ``sequences`` is tau x K_tot with columns in cell-major order.  The Gram
    matrix of correlation coefficients is computed on first access and cached.
    """

    sequences: np.ndarray
    num_cells: int
    users_per_cell: int

    def __post_init__(self):
        if np.iscomplexobj(self.sequences):
            raise ValueError("pilot sequences must be real")
        seq = _frozen_array(self.sequences)
        if seq.ndim != 2:
            raise ValueError("sequences must be a tau x K_tot matrix")
        expected = self.num_cells * self.users_per_cell
        if seq.shape[1] != expected:
            raise ValueError(
                f"expected {expected} pilot columns for "
                f"{self.num_cells} cells x {self.users_per_cell} users, got {seq.shape[1]}"
            )
        norms = np.linalg.norm(seq, axis=0)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            worst = float(np.max(np.abs(norms - 1.0)))
            raise ValueError(f"pilot columns must have unit energy (worst deviation {worst:.3e})")
        object.__setattr__(self, "sequences", seq)

    @cached_property
    def gram(self) -> np.ndarray:
        g = self.sequences.T @ self.sequences
        g.setflags(write=False)
        return g

    @property
    def pilot_length(self) -> int:
        return self.sequences.shape[0]

    @property
    def num_users_total(self) -> int:
        return self.sequences.shape[1]

    def cell_block(self, cell: int) -> np.ndarray:
        """Pilot columns of one cell (1-based) as a tau x K matrix."""
        if not 1 <= cell <= self.num_cells:
            raise ValueError(f"cell index {cell} out of range 1..{self.num_cells}")
        K = self.users_per_cell
        return self.sequences[:, (cell - 1) * K : cell * K]


@dataclass(frozen=True)
class PowerAllocation:
    """Downlink symbol powers P and the per-user LS-estimate moments alpha."""

    power: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        power = _frozen_array(self.power)
        alpha = _frozen_array(self.alpha)
        if power.shape != alpha.shape or power.ndim != 2:
            raise ValueError("power and alpha must be matching L x K matrices")
        if np.any(alpha <= 0):
            raise ValueError("alpha must be > 0")
        if np.any(power < 0):
            raise ValueError("powers must be >= 0")
        # P = alpha * gamma/(1+gamma) is always strictly below alpha
        if np.any(power >= alpha):
            raise ValueError("each power must be strictly below its alpha")
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class UserIndex:
    """1-based (cell, user) pair."""

    cell: int
    user: int


def flat_index(u: UserIndex, config: NetworkConfig) -> int:
    """Cell-major flat position of a user, 1-based."""
    if not 1 <= u.cell <= config.num_cells:
        raise ValueError(f"cell {u.cell} out of range 1..{config.num_cells}")
    if not 1 <= u.user <= config.users_per_cell:
        raise ValueError(f"user {u.user} out of range 1..{config.users_per_cell}")
    return (u.cell - 1) * config.users_per_cell + u.user


def unflatten_index(index: int, config: NetworkConfig) -> UserIndex:
    """Inverse of :func:`flat_index`."""
    total = config.num_users_total
    if not 1 <= index <= total:
        raise ValueError(f"flat index {index} out of range 1..{total}")
    cell, user = divmod(index - 1, config.users_per_cell)
    return UserIndex(cell=cell + 1, user=user + 1)
