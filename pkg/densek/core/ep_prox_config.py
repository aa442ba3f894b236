# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Class for EP-Prox configuration settings."""

import math

from densek.core.graph import POWER_INFLATION, POWER_MAX_ITER, POWER_REL_TOL
from densek.utils.log import Log

EXTRAPOLATION_MODES = ("practical", "theory")

DKS_SCHEDULE = {"lambda_growth": 20.0, "stop_sq_tol": 1e-11}
DKBS_SCHEDULE = {"lambda_growth": 10.0, "stop_sq_tol": 1e-15}
# slow annealing from a penalty of order one; stops only at the cap
GENTLE_SCHEDULE = {
    "lambda0": 1.0,
    "lambda_growth": 1.01,
    "lambda_update_rel_change": 1e-3,
    "lambda_update_patience": 1000,
    "max_iter": 5000,
    "stop_sq_tol": 1e-11,
    "stop_requires_cap": True,
}


# pylint: disable=too-many-instance-attributes,too-many-arguments,too-many-locals,too-few-public-methods
class SolverConfig:
    """Class for EP-Prox configuration settings.

    Attr:
        lambda0 (float): Initial penalty weight.
        lambda_growth (float): Multiplicative factor applied on every penalty update.
        lambda_update_rel_change (float): The penalty grows when
                ‖x⁺ - x‖ / ‖x⁺‖ drops below this value.
        lambda_update_patience (int): The penalty grows at the latest after this many
                iterations without an update.
        stop_sq_tol (float): Stop once ‖x⁺ - x‖² is at most this value.
        max_iter (int): Iteration cap.
        c1, c2 (float): Step-size contract; the step is η = 1 / (c1 L_f) with
                1 < c1 <= c2.
        extrapolation_mode (str): 'practical' uses raw FISTA weights, 'theory' clamps
                them below (c1 - 1) / (2 + 2 c2).
        lambda_cap_factor (float): The penalty stops growing at this multiple of the
                exactness threshold 2√n‖A‖₂.
        fixed_lambda (float or NoneType): Runs at this constant penalty, no annealing.
        stop_requires_cap (bool): When off (default) the run stops at the first
                iteration with ‖x⁺ - x‖² <= stop_sq_tol. When on, that stop counts
                only once the penalty is capped (or fixed); below the cap a stalled
                step ends an annealing stage instead.
        power_rel_tol, power_max_iter, power_inflation: Spectral-norm estimate settings.
        seed (int): Seed for the randomized pieces (power-iteration start vector).
    """

    def __init__(
        self,
        lambda0=1e-10,
        lambda_growth=20.0,
        lambda_update_rel_change=0.5,
        lambda_update_patience=10,
        stop_sq_tol=1e-11,
        max_iter=100,
        c1=1.01,
        c2=1.01,
        extrapolation_mode="practical",
        lambda_cap_factor=1.0,
        fixed_lambda=None,
        stop_requires_cap=False,
        power_rel_tol=POWER_REL_TOL,
        power_max_iter=POWER_MAX_ITER,
        power_inflation=POWER_INFLATION,
        seed=0,
    ):
        """The constructor for the SolverConfig class."""
        self.lambda0 = lambda0
        self.lambda_growth = lambda_growth
        self.lambda_update_rel_change = lambda_update_rel_change
        self.lambda_update_patience = lambda_update_patience
        self.stop_sq_tol = stop_sq_tol
        self.max_iter = max_iter
        self.c1 = c1  # pylint: disable=invalid-name
        self.c2 = c2  # pylint: disable=invalid-name
        self.extrapolation_mode = extrapolation_mode
        self.lambda_cap_factor = lambda_cap_factor
        self.fixed_lambda = fixed_lambda
        self.stop_requires_cap = stop_requires_cap
        self.power_rel_tol = power_rel_tol
        self.power_max_iter = power_max_iter
        self.power_inflation = power_inflation
        self.seed = seed
        self.validate()

    @classmethod
    def for_dks(cls, **overrides) -> "SolverConfig":
        """Published schedule for the densest k-subgraph problem."""
        return cls(**{**DKS_SCHEDULE, **overrides})

    @classmethod
    def for_dkbs(cls, **overrides) -> "SolverConfig":
        """Published schedule for the bipartite (k1, k2) problem."""
        return cls(**{**DKBS_SCHEDULE, **overrides})

    @classmethod
    def gentle(cls, **overrides) -> "SolverConfig":
        """Slow schedule for small dense instances, usable in both modes.

        Starts at λ = 1, grows it by 1% per stage and honours the step stop only at
        the cap.
        """
        return cls(**{**GENTLE_SCHEDULE, **overrides})

    @property
    def gamma_bar(self) -> float:
        """Extrapolation cap (c1 - 1) / (2 + 2 c2) of the convergence theory."""
        return (self.c1 - 1.0) / (2.0 + 2.0 * self.c2)

    def replace(self, **overrides) -> "SolverConfig":
        """Returns a validated copy with some fields overridden."""
        return SolverConfig(**{**vars(self), **overrides})

    def validate(self):
        """Validates the configuration settings."""
        if not 1.0 < self.c1 <= self.c2 < math.inf:
            raise ValueError(
                f"Step-size constants must satisfy 1 < c1 <= c2 < inf, "
                f"got c1={self.c1}, c2={self.c2}."
            )
        if not self.lambda0 > 0 or not math.isfinite(self.lambda0):
            raise ValueError("lambda0 must be finite and > 0.")
        if not self.lambda_growth > 1:
            raise ValueError("lambda_growth must be > 1.")
        if not 0 < self.lambda_update_rel_change < 1:
            raise ValueError("lambda_update_rel_change must lie in (0, 1).")
        if self.lambda_update_patience < 1:
            raise ValueError("lambda_update_patience must be at least 1.")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1.")
        if self.stop_sq_tol < 0:
            raise ValueError("stop_sq_tol must be >= 0.")
        if self.extrapolation_mode not in EXTRAPOLATION_MODES:
            raise ValueError(
                f"extrapolation_mode must be one of {EXTRAPOLATION_MODES}, "
                f"got '{self.extrapolation_mode}'."
            )
        if not self.lambda_cap_factor > 0:
            raise ValueError("lambda_cap_factor must be > 0.")
        if self.fixed_lambda is not None and (
            not self.fixed_lambda > 0 or not math.isfinite(self.fixed_lambda)
        ):
            raise ValueError("fixed_lambda must be finite and > 0.")
        if self.power_max_iter < 1 or not self.power_rel_tol > 0:
            raise ValueError("Power-iteration settings must be positive.")
        if self.power_inflation < 0:
            raise ValueError("power_inflation must be >= 0.")

        Log.log("Configuration settings are valid.")
