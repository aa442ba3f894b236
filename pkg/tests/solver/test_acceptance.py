# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Property checks of EP-Prox on seeded desk-scale instances."""
import itertools
import math
import os
import time
import unittest
from unittest import mock

import numpy as np

from densek import (
    Graph,
    Log,
    SolverConfig,
    brute_force_dkbs,
    brute_force_dks,
    ep_prox_solve,
    ep_prox_solve_bipartite,
    exactness_threshold,
    greedy_dks,
    lipschitz_grad_constant,
    residual_bound_check,
)
from densek.core import ep_prox
from densek.core.graph import erdos_renyi, random_biadjacency
from densek.core.penalty import PenaltyContext, objective_F


def _complete_graph(num_nodes):
    return Graph.from_edges(
        num_nodes,
        [(i, j) for i in range(num_nodes) for j in range(i + 1, num_nodes)],
    )


def _assert_selection(test, selection, k):
    test.assertTrue(np.all((selection == 0.0) | (selection == 1.0)))
    test.assertEqual(int(selection.sum()), k)


class TestFeasibility(unittest.TestCase):
    """Converged runs land on the selection set."""

    def test_converged_runs_are_binary(self):
        """Step-stopped runs with λ at its cap are within 1e-3 of a selection."""
        for gated in (False, True):
            converged = 0
            for seed in range(200):
                graph = erdos_renyi(50, 0.2, seed=seed)
                for k in (5, 10):
                    config = SolverConfig.for_dks(stop_requires_cap=gated)
                    result = ep_prox_solve(graph, k, config)
                    _assert_selection(self, result.selection, k)
                    if result.converged_by == "step_tol" and result.lambda_at_cap:
                        converged += 1
                        self.assertLessEqual(result.distance_to_binary, 1e-3)
            self.assertGreater(converged, 0)


class TestSmallInstances(unittest.TestCase):
    """EP-Prox against the brute-force oracle and greedy peeling on G(12, 0.5)."""

    def test_optimality_rates(self):
        """The oracle dominates; the gentle schedule finds it on most instances."""
        config = SolverConfig.gentle()
        optimal, beats_greedy = 0, 0
        for seed in range(50):
            graph = erdos_renyi(12, 0.5, seed=seed)
            result = ep_prox_solve(graph, 4, config)
            _assert_selection(self, result.selection, 4)
            best = brute_force_dks(graph, 4).density
            self.assertLessEqual(result.density, best)
            optimal += result.density == best
            beats_greedy += result.density >= greedy_dks(graph, 4).density
        Log.log(f"G(12, 0.5), k=4: optimal {optimal}/50, >= greedy {beats_greedy}/50")
        self.assertGreaterEqual(optimal, 30)
        self.assertGreaterEqual(beats_greedy, 35)


class TestConvergenceBound(unittest.TestCase):
    """Fixed-penalty theory-mode run on K5 with k = 3."""

    def setUp(self):
        self.graph = _complete_graph(5)
        self.lam = 1.05 * exactness_threshold(self.graph)
        self.config = SolverConfig(
            c1=2.0,
            c2=2.0,
            extrapolation_mode="theory",
            fixed_lambda=self.lam,
            stop_sq_tol=0.0,
            max_iter=1001,
        )
        self.result = ep_prox_solve(self.graph, 3, self.config)
        ctx = PenaltyContext(3, self.lam)
        self.f_initial = objective_F(self.graph, np.full(5, 0.2), ctx)[0]
        self.f_star = min(
            objective_F(self.graph, np.isin(np.arange(5), subset) * 1.0, ctx)[0]
            for subset in itertools.combinations(range(5), 3)
        )

    def test_residual_bound(self):
        """min residual proxy <= √(C/(J+1))."""
        lipschitz = lipschitz_grad_constant(self.graph, self.config)
        lhs, rhs = residual_bound_check(
            self.result.trace,
            self.config,
            self.f_star,
            lipschitz,
            1000,
            F_initial=self.f_initial,
        )
        self.assertLessEqual(lhs, rhs)
        for record in self.result.trace:
            self.assertLess(record.gamma_used, self.config.gamma_bar)

    def test_telescoped_descent(self):
        """No iterate rises above the starting objective."""
        for record in self.result.trace:
            self.assertLessEqual(record.F, self.f_initial + 1e-9)
        self.assertEqual(self.result.density, 1.0)


class TestLipschitz(unittest.TestCase):
    """Gradient and Lipschitz checks with the dense spectral norm."""

    def test_gradient_finite_differences(self):
        """∇f(x) = -2Ax matches central differences."""
        rng = np.random.default_rng(1)
        graph = erdos_renyi(20, 0.3, seed=1)
        dense = graph.to_dense()

        def objective(x):
            return -float(x @ dense @ x)

        step = 1e-5
        for _ in range(20):
            x = rng.random(graph.n)
            gradient = -2.0 * (graph.adjacency @ x)
            numeric = np.array(
                [
                    (objective(x + step * e) - objective(x - step * e)) / (2 * step)
                    for e in np.eye(graph.n)
                ]
            )
            error = np.linalg.norm(numeric - gradient) / np.linalg.norm(gradient)
            self.assertLessEqual(error, 1e-5)

    def test_lipschitz_inequalities(self):
        """Gradient and objective Lipschitz bounds on random pairs."""
        rng = np.random.default_rng(2)
        for trial in range(1000):
            if trial % 100 == 0:
                graph = erdos_renyi(int(rng.integers(10, 31)), 0.3, seed=trial)
                dense = graph.to_dense()
                norm = np.abs(np.linalg.eigvalsh(dense)).max()
                self.assertGreaterEqual(lipschitz_grad_constant(graph), 2 * norm)
            x, y = rng.random(graph.n), rng.random(graph.n)
            gap = np.linalg.norm(x - y)
            gradient_gap = np.linalg.norm(2.0 * (dense @ x) - 2.0 * (dense @ y))
            self.assertLessEqual(gradient_gap, 2 * norm * gap * (1 + 1e-12))
            objective_gap = abs(float(x @ dense @ x) - float(y @ dense @ y))
            self.assertLessEqual(
                objective_gap, 2 * math.sqrt(graph.n) * norm * gap * (1 + 1e-12)
            )


class TestBipartiteInstances(unittest.TestCase):
    """Bipartite EP-Prox against brute_force_dkbs."""

    def test_feasible_and_dominated(self):
        """Every selection is feasible, never beats the oracle, and often matches it."""
        rng = np.random.default_rng(3)
        optimal, runs = 0, 0
        for seed in range(50):
            num_left, num_right = int(rng.integers(3, 11)), int(rng.integers(3, 11))
            try:
                graph = random_biadjacency(num_left, num_right, 0.4, seed=seed)
            except ValueError:
                continue
            if graph.n1 < 2 or graph.n2 < 2:
                continue
            k1 = int(rng.integers(1, graph.n1))
            k2 = int(rng.integers(1, graph.n2))
            result = ep_prox_solve_bipartite(graph, k1, k2, SolverConfig.gentle())
            _assert_selection(self, result.selection[: graph.n1], k1)
            _assert_selection(self, result.selection[graph.n1 :], k2)
            best = brute_force_dkbs(graph, k1, k2).density
            self.assertLessEqual(result.density, best)
            optimal += result.density == best
            runs += 1
        Log.log(f"bipartite: optimal {optimal}/{runs}")
        self.assertGreater(runs, 0)
        self.assertGreaterEqual(optimal, math.ceil(0.6 * runs))


@unittest.skipUnless(os.environ.get("DENSEK_SLOW"), "set DENSEK_SLOW=1 to run")
class TestScale(unittest.TestCase):
    """Large sparse smoke run."""

    def test_million_nodes(self):
        """n = 10^6, m ≈ 5·10^6, k = 100 within ten minutes, kernels dominating."""
        rng = np.random.default_rng(0)
        num_nodes = 10**6
        pairs = rng.integers(0, num_nodes, size=(5 * num_nodes, 2))
        graph = Graph.from_edges(num_nodes, pairs)
        kernel_calls = []
        iteration_ends = []

        def timed(function):
            def wrapper(*args, **kwargs):
                begin = time.perf_counter()
                value = function(*args, **kwargs)
                kernel_calls.append((begin, time.perf_counter() - begin))
                return value

            return wrapper

        def on_iteration(state, record):  # pylint: disable=unused-argument
            iteration_ends.append(time.perf_counter())

        spmv_patch = mock.patch.object(ep_prox, "spmv", timed(ep_prox.spmv))
        prox_patch = mock.patch.object(
            ep_prox, "prox_h_segmented", timed(ep_prox.prox_h_segmented)
        )
        start = time.perf_counter()
        with spmv_patch, prox_patch:
            result = ep_prox_solve(graph, 100, callback=on_iteration)
        self.assertLess(time.perf_counter() - start, 600)
        _assert_selection(self, result.selection, 100)
        self.assertEqual(len(iteration_ends), result.iterations)

        # the loop spans the first kernel call to the last callback
        loop_start, loop_end = kernel_calls[0][0], iteration_ends[-1]
        kernel_time = sum(
            elapsed for begin, elapsed in kernel_calls if begin < loop_end
        )
        share = kernel_time / (loop_end - loop_start)
        Log.log(f"spmv + prox share of iteration time: {share:.3f}")
        self.assertGreaterEqual(share, 0.9)
