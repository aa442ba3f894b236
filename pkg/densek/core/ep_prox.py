# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""EP-Prox: annealed exact-penalty proximal gradient for dense subgraph selection.

Each iteration extrapolates ``z = x + γ(x - x⁻)``, takes a gradient step on
``f(x) = -xᵀAx`` (``∇f(z) = -2Az``) and applies the closed-form prox of ``ηλh``. The
penalty λ is annealed from a tiny value towards the exactness threshold 2√n‖A‖₂.
"""

import math
import time
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from densek.core.ep_prox_config import SolverConfig
from densek.core.ep_prox_result import IterationRecord, SolverResult
from densek.core.graph import BipartiteGraph, Graph, spectral_norm_estimate, spmv
from densek.core.metrics import bipartite_density, edge_density
from densek.core.penalty import (
    prox_h_segmented,
    segmented_penalty_h,
    segmented_round,
)
from densek.utils.log import Log

Segments = Sequence[Tuple[int, int, int]]

GAMMA_CLAMP = 0.999


class SolverDivergenceError(RuntimeError):
    """Raised when an iterate becomes non-finite."""


# pylint: disable=too-many-instance-attributes,too-few-public-methods
class SolverState:
    """Mutable state of one solver run.

    Attributes:
        x (np.ndarray): current iterate, always inside [0, 1]^n.
        x_prev (np.ndarray): previous iterate.
        lam (float): current penalty weight.
        iter (int): number of steps taken.
        iters_since_lambda_update (int): steps since the last penalty update.
        t (float): FISTA accumulator, >= 1.
    """

    def __init__(
        self,
        x,
        x_prev=None,
        lam=0.0,
        iter=0,  # pylint: disable=redefined-builtin
        iters_since_lambda_update=0,
        t=1.0,
    ):
        self.x = np.asarray(x, dtype=np.float64)
        self.x_prev = (
            self.x.copy() if x_prev is None else np.asarray(x_prev, dtype=np.float64)
        )
        self.lam = lam
        self.iter = iter
        self.iters_since_lambda_update = iters_since_lambda_update
        self.t = t

    def __repr__(self):
        return f"SolverState(iter={self.iter}, lam={self.lam:.3g}, t={self.t:.3g})"


def _spectral_norm(graph, config: SolverConfig) -> float:
    return spectral_norm_estimate(
        graph,
        rel_tol=config.power_rel_tol,
        max_iter=config.power_max_iter,
        seed=config.seed,
        inflation=config.power_inflation,
    )


def lipschitz_grad_constant(graph, config: Optional[SolverConfig] = None) -> float:
    """L_f = 2‖A‖₂, the Lipschitz constant of ∇f on [0, 1]^n."""
    return 2.0 * _spectral_norm(graph, config or SolverConfig())


def exactness_threshold(graph, config: Optional[SolverConfig] = None) -> float:
    """2√n‖A‖₂; above it the penalized problem has the same global and local minima."""
    return 2.0 * math.sqrt(graph.n) * _spectral_norm(graph, config or SolverConfig())


def residual_constant(lipschitz: float, c2: float) -> float:
    """C1 = √(2(1 + c2²)) L_f."""
    return math.sqrt(2.0 * (1.0 + c2**2)) * lipschitz


def pgm_step(
    graph,
    state: SolverState,
    k: int,
    eta: float,
    gamma: float,
    lam: float,
    segments: Optional[Segments] = None,
    residual_const: Optional[float] = None,
) -> Tuple[SolverState, IterationRecord]:
    """One extrapolated proximal-gradient step.

    Args:
        graph: Graph, or BipartiteGraph (block adjacency).
        state: current state; not modified.
        k: cardinality target, ignored when ``segments`` is given.
        eta: step size > 0.
        gamma: extrapolation weight in [0, 1).
        lam: penalty weight.
        segments: ``(start, stop, k)`` blocks with their own cardinality.
        residual_const: C1 for the residual proxy; defaults to √(2(1 + c²))/(c η) with
            c = 1.01, i.e. c1 = c2 = 1.01.

    Returns:
        The new state (iteration counter advanced) and the iteration record.
    """
    if not eta > 0:
        raise ValueError("Step size must be > 0.")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("Extrapolation weight must lie in [0, 1).")
    if segments is None:
        segments = [(0, state.x.size, k)]
    if residual_const is None:
        default_c = SolverConfig().c1
        residual_const = residual_constant(1.0 / (default_c * eta), default_c)

    x, x_prev = state.x, state.x_prev
    momentum = x - x_prev
    z = x + gamma * momentum
    # z - η∇f(z) = z + 2ηAz
    forward = z + 2.0 * eta * spmv(graph, z)
    if not np.all(np.isfinite(forward)):
        raise SolverDivergenceError("divergence")
    mu = eta * lam
    if mu > 0:
        x_new, h_value = prox_h_segmented(forward, segments, mu, return_h=True)
    else:
        x_new = np.clip(forward, 0.0, 1.0)
        h_value = segmented_penalty_h(x_new, segments)

    f_value = -float(x_new @ spmv(graph, x_new))
    step_norm = float(np.linalg.norm(x_new - x))
    new_norm = float(np.linalg.norm(x_new))
    if new_norm > 0:
        rel_change = step_norm / new_norm
    else:
        rel_change = 0.0 if step_norm == 0 else 1.0
    record = IterationRecord(
        iter=state.iter,
        lam=lam,
        F=f_value + lam * h_value,
        f=f_value,
        h=h_value,
        psi=h_value + sum(seg_k for _, _, seg_k in segments),
        step_norm=step_norm,
        rel_change=rel_change,
        residual_proxy=residual_const * (step_norm + float(np.linalg.norm(momentum))),
        gamma_used=gamma,
        eta_used=eta,
    )
    new_state = SolverState(
        x_new,
        x,
        lam=state.lam,
        iter=state.iter + 1,
        iters_since_lambda_update=state.iters_since_lambda_update,
        t=state.t,
    )
    return new_state, record


def extrapolation_weight(state: SolverState, config: SolverConfig) -> float:
    """FISTA weight γ = (t - 1)/t⁺ with t⁺ = (1 + √(1 + 4t²))/2; advances ``state.t``.

    In theory mode γ is clamped to 0.999 γ̄ with γ̄ = (c1 - 1)/(2 + 2c2).
    """
    t_cur = state.t
    if t_cur < 1:
        raise ValueError("FISTA accumulator must be >= 1.")
    t_next = (1.0 + math.sqrt(1.0 + 4.0 * t_cur * t_cur)) / 2.0
    gamma = (t_cur - 1.0) / t_next
    state.t = t_next
    if config.extrapolation_mode == "theory":
        gamma = min(gamma, GAMMA_CLAMP * config.gamma_bar)
    return gamma


# pylint: disable=too-many-arguments,too-many-locals
def _anneal(
    graph,
    segments: Segments,
    x_init: np.ndarray,
    config: SolverConfig,
    sigma: float,
    callback: Optional[Callable[[SolverState, IterationRecord], None]],
):
    """Runs the annealed loop; returns (state, trace, converged_by, at_cap, seconds)."""
    lipschitz = 2.0 * sigma
    eta = 1.0 / (config.c1 * lipschitz)
    c_one = residual_constant(lipschitz, config.c2)
    fixed = config.fixed_lambda is not None
    if fixed:
        lam = cap = config.fixed_lambda
    else:
        cap = config.lambda_cap_factor * 2.0 * math.sqrt(x_init.size) * sigma
        lam = min(config.lambda0, cap)

    state = SolverState(x_init, lam=lam)
    trace: List[IterationRecord] = []
    converged_by = "max_iter"
    start = time.perf_counter()
    while state.iter < config.max_iter:
        gamma = extrapolation_weight(state, config)
        state, record = pgm_step(
            graph, state, 0, eta, gamma, state.lam, segments, residual_const=c_one
        )
        trace.append(record)
        if callback is not None:
            callback(state, record)

        at_cap = fixed or state.lam >= cap
        if record.step_norm**2 <= config.stop_sq_tol and (
            at_cap or not config.stop_requires_cap
        ):
            converged_by = "step_tol"
            break
        if at_cap:
            continue
        state.iters_since_lambda_update += 1
        if (
            record.rel_change < config.lambda_update_rel_change
            or state.iters_since_lambda_update >= config.lambda_update_patience
        ):
            state.lam = min(state.lam * config.lambda_growth, cap)
            state.iters_since_lambda_update = 0
            # momentum built for the previous objective is discarded
            state.t = 1.0
            Log.log(f"iter {state.iter}: lambda -> {state.lam:.4g}")

    elapsed = time.perf_counter() - start
    at_cap = fixed or state.lam >= cap
    Log.log(
        f"EP-Prox stopped by {converged_by} after {state.iter} iterations "
        f"in {elapsed:.4f} s (lambda={state.lam:.4g})"
    )
    return state, trace, converged_by, at_cap, elapsed


def _check_config(config: Optional[SolverConfig], default) -> SolverConfig:
    if config is None:
        return default()
    config.validate()
    return config


def ep_prox_solve(
    graph: Graph,
    k: int,
    config: Optional[SolverConfig] = None,
    callback: Optional[Callable[[SolverState, IterationRecord], None]] = None,
) -> SolverResult:
    """Solves the densest k-subgraph problem with EP-Prox.

    Args:
        graph: preprocessed graph.
        k: cardinality, 1 <= k <= n.
        config: defaults to the published DkS schedule.
        callback: called as ``callback(state, record)`` after every step.

    Returns:
        The rounded selection with its density and the full trace.
    """
    if not 1 <= k <= graph.n:
        raise ValueError(f"k={k} must satisfy 1 <= k <= n={graph.n}.")
    config = _check_config(config, SolverConfig.for_dks)
    sigma = _spectral_norm(graph, config)
    x_init = np.full(graph.n, 1.0 / graph.n)
    state, trace, converged_by, at_cap, elapsed = _anneal(
        graph, [(0, graph.n, k)], x_init, config, sigma, callback
    )

    selection = segmented_round(state.x, [(0, graph.n, k)])
    twice_edges = float(selection @ spmv(graph, selection))
    if k >= 2:
        report = edge_density(graph, selection, k)
        density, edges_inside = report.density, report.edges_inside
    else:
        density, edges_inside = float("nan"), 0
    return SolverResult(
        selection=selection,
        x_final=state.x,
        density=density,
        edges_inside=edges_inside,
        objective_f=-twice_edges,
        iterations=state.iter,
        converged_by=converged_by,
        distance_to_binary=float(np.linalg.norm(state.x - selection)),
        trace=trace,
        wall_time=elapsed,
        lambda_final=state.lam,
        lambda_at_cap=at_cap,
        selected_labels=graph.labels[np.flatnonzero(selection)].tolist(),
    )


def ep_prox_solve_bipartite(
    graph: BipartiteGraph,
    k1: int,
    k2: int,
    config: Optional[SolverConfig] = None,
    callback: Optional[Callable[[SolverState, IterationRecord], None]] = None,
) -> SolverResult:
    """Solves the densest (k1, k2) bipartite subgraph problem with EP-Prox.

    The variable is the stacked ``a = (x, y)`` over the block adjacency
    ``[[0, B], [Bᵀ, 0]]``; the prox treats the two segments separately.
    """
    if not 1 <= k1 <= graph.n1:
        raise ValueError(f"k1={k1} must satisfy 1 <= k1 <= n1={graph.n1}.")
    if not 1 <= k2 <= graph.n2:
        raise ValueError(f"k2={k2} must satisfy 1 <= k2 <= n2={graph.n2}.")
    config = _check_config(config, SolverConfig.for_dkbs)
    n1 = graph.n1
    segments = [(0, n1, k1), (n1, graph.n, k2)]
    sigma = _spectral_norm(graph, config)
    x_init = np.full(graph.n, 1.0 / (k1 + k2))
    state, trace, converged_by, at_cap, elapsed = _anneal(
        graph, segments, x_init, config, sigma, callback
    )

    selection = segmented_round(state.x, segments)
    left, right = selection[:n1], selection[n1:]
    report = bipartite_density(graph, left, right, k1, k2)
    selected_labels = [("left", label) for label in graph.left_labels[left > 0]] + [
        ("right", label) for label in graph.right_labels[right > 0]
    ]
    return SolverResult(
        selection=selection,
        x_final=state.x,
        density=report.density,
        edges_inside=report.edges_inside,
        objective_f=-2.0 * report.edges_inside,
        iterations=state.iter,
        converged_by=converged_by,
        distance_to_binary=float(np.linalg.norm(state.x - selection)),
        trace=trace,
        wall_time=elapsed,
        lambda_final=state.lam,
        lambda_at_cap=at_cap,
        selected_labels=selected_labels,
    )


# pylint: disable=invalid-name
def residual_bound_check(
    trace: Sequence[IterationRecord],
    config: SolverConfig,
    F_star: float,
    L_f: float,
    J: int,
    F_initial: float,
) -> Tuple[float, float]:
    """Sublinear residual bound of a fixed-penalty run.

    Compares ``min_{ℓ<=J}`` of the residual proxy with ``√(C/(J+1))`` where
    ``C = 64(1+c2²)(c1-1)(F(x⁰) - F*)‖A‖₂ / ((c1-1)² - 4γ̄²(c2+1)²)`` and γ̄ is the
    largest extrapolation weight the run used. ``J`` is clamped to the trace length.

    Args:
        trace: records of a fixed-λ run.
        config: the run's configuration (supplies c1, c2).
        F_star: lower bound on the penalized objective over the box.
        L_f: Lipschitz constant the run used (‖A‖₂ = L_f / 2).
        J: iteration horizon.
        F_initial: penalized objective at the starting point.

    Returns:
        tuple: ``(lhs, rhs)``; the bound holds when ``lhs <= rhs``.

    Raises:
        ValueError: if the denominator is not positive ("extrapolation cap violated").
    """
    if not trace:
        raise ValueError("Empty trace.")
    J = min(J, len(trace) - 1)
    window = trace[: J + 1]
    c1, c2 = config.c1, config.c2
    gamma_max = max(record.gamma_used for record in window)
    denominator = (c1 - 1.0) ** 2 - 4.0 * gamma_max**2 * (c2 + 1.0) ** 2
    if denominator <= 0:
        raise ValueError("extrapolation cap violated")
    gap = F_initial - F_star
    if gap < 0:
        raise ValueError("F_star is not a lower bound on the starting objective.")
    constant = 64.0 * (1.0 + c2**2) * (c1 - 1.0) * gap * (L_f / 2.0) / denominator
    lhs = min(record.residual_proxy for record in window)
    return lhs, math.sqrt(constant / (J + 1))
