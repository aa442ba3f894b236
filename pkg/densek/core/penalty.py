# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Exact-penalty building blocks for cardinality-constrained selection.

The selection set U_k^n holds the binary vectors with exactly k ones. On the box
[0, 1]^n the penalty ``h(x) = 1ᵀx - 2 S_k(x)`` (S_k the max-k-sum) satisfies
``h(x) + k = ψ(x) >= dist(x, U_k^n)`` with equality to zero exactly on U_k^n.

Whenever a k-th rank tie has to be broken, the lower index joins the top-k set; every
function in this module goes through :func:`top_k_indices` so they agree.
"""

from typing import Iterable, Tuple

import numpy as np

from densek.core.graph import spmv

BOX_TOL = 1e-12


class PenaltyContext:  # pylint: disable=too-few-public-methods
    """Cardinality target and penalty weight of the penalized objective.

    Attributes:
        k (int): cardinality target.
        lam (float): penalty weight λ >= 0.
    """

    def __init__(self, k: int, lam: float, n: int = None):
        if n is not None and not 1 <= k < n:
            raise ValueError(f"k={k} must satisfy 1 <= k < n={n}.")
        if k < 1:
            raise ValueError(f"k={k} must be at least 1.")
        if not np.isfinite(lam) or lam < 0:
            raise ValueError(f"Penalty weight must be finite and >= 0, got {lam}.")
        self.k = int(k)
        self.lam = float(lam)

    def __repr__(self):
        return f"PenaltyContext(k={self.k}, lam={self.lam})"


def _check_k(k: int, size: int):
    if not 1 <= k <= size:
        raise ValueError(f"k={k} out of range [1, {size}].")


def top_k_indices(x: np.ndarray, k: int) -> np.ndarray:
    """Returns the sorted indices of the k largest entries, lower index winning ties.

    Selection runs through ``np.argpartition`` (linear time); only the entries tied
    with the k-th largest value need an explicit index order.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_k(k, x.size)
    if not np.all(np.isfinite(x)):
        raise ValueError("top-k selection needs finite entries.")
    if k == x.size:
        return np.arange(x.size)
    threshold = x[np.argpartition(-x, k - 1)[k - 1]]
    above = np.flatnonzero(x > threshold)
    ties = np.flatnonzero(x == threshold)[: k - above.size]
    return np.sort(np.concatenate([above, ties]))


def top_k_mask(x: np.ndarray, k: int) -> np.ndarray:
    """Returns a boolean mask of :func:`top_k_indices`."""
    mask = np.zeros(np.size(x), dtype=bool)
    mask[top_k_indices(x, k)] = True
    return mask


def max_k_sum(x: np.ndarray, k: int) -> float:
    """Sum of the k largest entries of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    values = x[top_k_indices(x, k)]
    # descending order, the order a sort-based reference adds them in
    return float(np.sum(np.sort(values)[::-1]))


def error_bound_psi(x: np.ndarray, k: int) -> float:
    """ψ(x) = k + 1ᵀx - 2 S_k(x), an upper bound on the distance from x to U_k^n.

    Raises:
        ValueError: if an entry is not finite or lies outside [0, 1] by more than 1e-12.
    """
    x = np.asarray(x, dtype=np.float64)
    # NaN fails both comparisons
    if not np.all((x >= -BOX_TOL) & (x <= 1.0 + BOX_TOL)):
        raise ValueError("error_bound_psi is only defined on the box [0, 1]^n.")
    return float(k + np.sum(x) - 2.0 * max_k_sum(x, k))


def dist_to_selection(x: np.ndarray, k: int) -> Tuple[float, np.ndarray]:
    """Euclidean distance from ``x`` to U_k^n and the nearest selection vector."""
    x = np.asarray(x, dtype=np.float64)
    nearest = top_k_mask(x, k).astype(np.float64)
    return float(np.linalg.norm(x - nearest)), nearest


def round_to_selection(x: np.ndarray, k: int) -> np.ndarray:
    """Nearest member of U_k^n."""
    return dist_to_selection(x, k)[1]


def penalty_h(x: np.ndarray, k: int) -> float:
    """h(x) = 1ᵀx - 2 S_k(x)."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x) - 2.0 * max_k_sum(x, k))


def objective_F(  # pylint: disable=invalid-name
    graph, x: np.ndarray, ctx: PenaltyContext
) -> Tuple[float, float, float]:
    """Penalized objective ``F = f + λh`` with ``f(x) = -xᵀAx``.

    Returns:
        tuple: ``(F, f, h)``.
    """
    x = np.asarray(x, dtype=np.float64)
    f_value = -float(x @ spmv(graph, x))
    h_value = penalty_h(x, ctx.k)
    return f_value + ctx.lam * h_value, f_value, h_value


def _check_prox_args(z: np.ndarray, mu: float):
    if not np.all(np.isfinite(z)):
        raise ValueError("prox_h input must be finite.")
    if not np.isfinite(mu) or mu <= 0:
        raise ValueError(f"prox weight mu must be finite and > 0, got {mu}.")


def _prox_block(z: np.ndarray, k: int, mu: float) -> Tuple[np.ndarray, np.ndarray]:
    mask = top_k_mask(z, k)
    return np.clip(z + np.where(mask, mu, -mu), 0.0, 1.0), mask


def prox_h(z: np.ndarray, k: int, mu: float) -> np.ndarray:
    """Closed-form global minimizer over [0, 1]^n of ½‖z - x‖² + μ h(x).

    The k largest entries of ``z`` move up by μ, the others down by μ, then every
    coordinate is clipped to [0, 1]. ``z`` itself may lie outside the box.
    """
    z = np.asarray(z, dtype=np.float64)
    _check_prox_args(z, mu)
    return _prox_block(z, k, mu)[0]


def prox_h_segmented(
    z: np.ndarray,
    segments: Iterable[Tuple[int, int, int]],
    mu: float,
    return_h: bool = False,
):
    """Applies :func:`prox_h` independently on disjoint ``(start, stop, k)`` segments.

    The segments must tile ``z``; the penalty is the sum of the per-segment penalties.
    With ``return_h`` the result is ``(x, h)`` where ``h`` equals
    ``segmented_penalty_h(x, segments)`` bit for bit, read off the prox top-k mask.
    """
    z = np.asarray(z, dtype=np.float64)
    _check_prox_args(z, mu)
    out = np.empty_like(z)
    covered = 0
    h_value = 0.0
    for start, stop, k in segments:
        block, mask = _prox_block(z[start:stop], k, mu)
        out[start:stop] = block
        covered += stop - start
        if return_h:
            # the shift and clip keep the order of z, so mask holds the k largest
            top = float(np.sum(np.sort(block[mask])[::-1]))
            h_value += float(np.sum(block) - 2.0 * top)
    if covered != z.size:
        raise ValueError("Segments must cover the whole vector.")
    if return_h:
        return out, h_value
    return out


def segmented_penalty_h(
    x: np.ndarray, segments: Iterable[Tuple[int, int, int]]
) -> float:
    """Sum of h over disjoint ``(start, stop, k)`` segments."""
    x = np.asarray(x, dtype=np.float64)
    return float(sum(penalty_h(x[start:stop], k) for start, stop, k in segments))


def segmented_round(
    x: np.ndarray, segments: Iterable[Tuple[int, int, int]]
) -> np.ndarray:
    """Rounds every segment to its own selection set."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for start, stop, k in segments:
        out[start:stop] = round_to_selection(x[start:stop], k)
    return out
