# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""EP-Prox results"""

import inspect
import json
import pprint
from collections import OrderedDict
from typing import IO, Iterable, List, Optional

import numpy as np


# pylint: disable=too-few-public-methods,too-many-arguments,too-many-instance-attributes
class AuxiliaryResults:
    """Base class for auxiliary results."""

    def _public_fields(self):
        return [
            (name, value)
            for name, value in inspect.getmembers(self)
            if not name.startswith("_")
            and not inspect.ismethod(value)
            and not inspect.isfunction(value)
        ]

    def __str__(self) -> str:
        return pprint.pformat(OrderedDict(self._public_fields()), indent=4)

    def __repr__(self):
        key_value_pairs = [f"{name}: {value}" for name, value in self._public_fields()]
        return f"{self.__class__.__name__}({key_value_pairs})"


class IterationRecord(AuxiliaryResults):
    """Diagnostics of one proximal-gradient iteration."""

    FIELDS = (
        "iter",
        "lam",
        "F",
        "f",
        "h",
        "psi",
        "step_norm",
        "rel_change",
        "residual_proxy",
        "gamma_used",
        "eta_used",
    )

    def __init__(
        self,
        iter,  # pylint: disable=redefined-builtin
        lam,
        F,  # pylint: disable=invalid-name
        f,
        h,
        psi,
        step_norm,
        rel_change,
        residual_proxy,
        gamma_used,
        eta_used,
    ):
        """Iteration record.

        Args:
            iter: iteration index ℓ (the record describes x^{ℓ+1}).
            lam: penalty weight used by the step.
            F: penalized objective at the new iterate.
            f: -xᵀAx at the new iterate.
            h: 1ᵀx - 2 S_k(x) at the new iterate.
            psi: error bound h + k at the new iterate.
            step_norm: ‖x⁺ - x‖.
            rel_change: ‖x⁺ - x‖ / ‖x⁺‖.
            residual_proxy: C1 (‖x⁺ - x‖ + ‖x - x⁻‖).
            gamma_used: extrapolation weight.
            eta_used: step size.
        """
        self.iter = iter
        self.lam = lam
        self.F = F  # pylint: disable=invalid-name
        self.f = f
        self.h = h
        self.psi = psi
        self.step_norm = step_norm
        self.rel_change = rel_change
        self.residual_proxy = residual_proxy
        self.gamma_used = gamma_used
        self.eta_used = eta_used

    def as_dict(self) -> dict:
        """Returns the record as a plain dict in field order."""
        return OrderedDict((name, getattr(self, name)) for name in self.FIELDS)


def trace_to_jsonl(trace: Iterable[IterationRecord], stream: IO[str], **context):
    """Writes one JSON object per record; ``context`` keys are prepended to each line."""
    for record in trace:
        stream.write(json.dumps({**context, **record.as_dict()}) + "\n")


class SolverResult(AuxiliaryResults):
    """EP-Prox result."""

    def __init__(
        self,
        selection: np.ndarray,
        x_final: np.ndarray,
        density: float,
        edges_inside: int,
        objective_f: float,
        iterations: int,
        converged_by: str,
        distance_to_binary: float,
        trace: Optional[List[IterationRecord]] = None,
        wall_time: float = 0.0,
        lambda_final: float = 0.0,
        lambda_at_cap: bool = False,
        selected_labels: Optional[list] = None,
    ) -> None:
        """Results for ep_prox_solve and ep_prox_solve_bipartite.

        Args:
            selection: rounded binary selection (stacked (x, y) for bipartite runs).
            x_final: last continuous iterate.
            density: edge density of the selection.
            edges_inside: edges induced by the selection.
            objective_f: -xᵀAx at the selection.
            iterations: number of proximal-gradient steps taken.
            converged_by: 'step_tol' or 'max_iter'.
            distance_to_binary: distance from x_final to the selection set.
            trace: per-iteration records.
            wall_time: seconds spent in the solver loop.
            lambda_final: penalty weight at termination.
            lambda_at_cap: whether the penalty had reached its cap (or was fixed).
            selected_labels: external labels of the selected vertices.
        """
        self.selection = selection
        self.x_final = x_final
        self.density = density
        self.edges_inside = edges_inside
        self.objective_f = objective_f
        self.iterations = iterations
        self.converged_by = converged_by
        self.distance_to_binary = distance_to_binary
        self.trace = trace or []
        self.wall_time = wall_time
        self.lambda_final = lambda_final
        self.lambda_at_cap = lambda_at_cap
        self.selected_labels = selected_labels or []

    def __repr__(self):
        return (
            f"Edge density: {self.density}\n"
            f"Edges inside: {self.edges_inside}\n"
            f"Iterations: {self.iterations} ({self.converged_by})\n"
            f"Distance to binary: {self.distance_to_binary}"
        )

    @property
    def support(self) -> np.ndarray:
        """Returns the indices of the selected coordinates."""
        return np.flatnonzero(self.selection)
