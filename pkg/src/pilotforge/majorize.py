"""Majorization tests and the T-transform chain.

A vector x majorizes z (both sorted nonincreasing) when every prefix sum of
x dominates the corresponding prefix sum of z and the totals agree.  When
x majorizes z, z is reachable from x by at most K-1 doubly stochastic
T-transforms, each the identity outside one 2x2 block ``[[1-xi, xi], [xi,
1-xi]]``.  Alongside each T step we build an orthogonal factor W_i whose
entries square to the T entries (negated below the diagonal); the ordered
product W = W_1 W_2 ... W_{K-1} satisfies ``diag(W^T D W) = z`` for
``D = diag(x)``, which is exactly what the pilot construction consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DegeneratePivotError

COMPARE_TOL = 1e-12
TOTAL_TOL = 1e-9
CONVERGE_TOL = 1e-11
PIVOT_TOL = 1e-14


def _check_sorted_pair(x: np.ndarray, z: np.ndarray) -> None:
    if x.ndim != 1 or z.ndim != 1:
        raise ValueError("inputs must be vectors")
    if x.shape != z.shape:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {z.shape[0]}")
    if np.any(np.diff(x) > COMPARE_TOL) or np.any(np.diff(z) > COMPARE_TOL):
        raise ValueError("inputs must be sorted nonincreasing")


def majorizes(x, z) -> bool:
    """Return True when x majorizes z.

    Both vectors must be sorted nonincreasing.  Prefix-sum domination is
    checked with a 1e-12 slack; the totals must agree within 1e-9.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    _check_sorted_pair(x, z)
    cx = np.cumsum(x)
    cz = np.cumsum(z)
    if abs(cx[-1] - cz[-1]) > TOTAL_TOL:
        return False
    return bool(np.all(cx[:-1] >= cz[:-1] - COMPARE_TOL))


def uniform_majorant(z, tau: int) -> np.ndarray:
    """Vector with sum(z)/tau in the first tau slots and zeros after.

    Majorizes z whenever max(z) does not exceed sum(z)/tau.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise ValueError("z must be a vector")
    K = z.shape[0]
    if not 1 <= tau <= K:
        raise ValueError(f"tau must lie in 1..{K}, got {tau}")
    total = float(np.sum(z))
    if total <= 0:
        raise ValueError("sum(z) must be > 0")
    x = np.zeros(K)
    x[:tau] = total / tau
    return x


@dataclass(frozen=True)
class TransformChain:
    """Result of walking a majorant x down to its target z.

    ``steps`` holds (k_min, k_max, xi) per T-transform with 0-based
    positions.  ``w_matrix`` is the ordered product of the orthogonal
    factors (identity for unused steps) and ``t_product_applied`` is the
    image of x under the accumulated T factors.
    """

    steps: tuple
    w_matrix: np.ndarray
    t_product_applied: np.ndarray


def t_transform_chain(x, z) -> TransformChain:
    """Build the T-transform chain taking x to z and its orthogonal factor W.

    Parameters
    ----------
    x, z : array
        Nonincreasing vectors with x majorizing z.

    Raises
    ------
    FeasibilityError-like ValueError when majorization fails, and
    DegeneratePivotError when a pivot denominator collapses (unreachable
    for valid sorted inputs; kept as a loud internal check).
    """
    x = np.array(np.asarray(x, dtype=float))
    z = np.asarray(z, dtype=float)
    if not majorizes(x, z):
        raise ValueError("x must majorize z for the T-transform chain")
    K = x.shape[0]
    w = np.eye(K)
    steps = []
    matched = int(np.sum(np.abs(x - z) <= COMPARE_TOL))

    for _ in range(K - 1):
        if np.max(np.abs(x - z)) <= CONVERGE_TOL:
            break
        below = np.nonzero(z < x - COMPARE_TOL)[0]
        above = np.nonzero(z > x + COMPARE_TOL)[0]
        if below.size == 0 or above.size == 0:
            break
        a = int(below[0])       # smallest index where x still exceeds z
        b = int(above[-1])      # largest index where z still exceeds x
        denom = x[a] - x[b]
        if denom < PIVOT_TOL:
            raise DegeneratePivotError(
                f"pivot ({a}, {b}) has x[a] - x[b] = {denom:.3e}; "
                "majorization precondition violated"
            )
        xi = min(x[a] - z[a], z[b] - x[b]) / denom
        if not 0.0 < xi <= 1.0:
            raise DegeneratePivotError(f"transform weight {xi!r} outside (0, 1]")

        xa, xb = x[a], x[b]
        x[a] = (1.0 - xi) * xa + xi * xb
        x[b] = xi * xa + (1.0 - xi) * xb

        # right-multiply the running product by W_i, which only mixes
        # columns a and b: W_i[a,a] = W_i[b,b] = sqrt(1-xi),
        # W_i[a,b] = sqrt(xi), W_i[b,a] = -sqrt(xi)
        c = np.sqrt(1.0 - xi)
        s = np.sqrt(xi)
        wa = w[:, a].copy()
        w[:, a] = c * wa - s * w[:, b]
        w[:, b] = s * wa + c * w[:, b]
        steps.append((a, b, float(xi)))

        # pivots are only eligible beyond COMPARE_TOL, so the saturated
        # coordinate always increases this count; anything else is a bug
        now_matched = int(np.sum(np.abs(x - z) <= COMPARE_TOL))
        if now_matched <= matched:
            raise DegeneratePivotError(
                "T-transform step made no progress; inputs violate the preconditions"
            )
        matched = now_matched

    if np.max(np.abs(x - z)) > TOTAL_TOL:
        raise DegeneratePivotError(
            f"chain did not reach the target within {K - 1} steps "
            f"(residual {float(np.max(np.abs(x - z))):.3e})"
        )
    w.setflags(write=False)
    x.setflags(write=False)
    return TransformChain(steps=tuple(steps), w_matrix=w, t_product_applied=x)
