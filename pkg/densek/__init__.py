# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Dense k-subgraph discovery with the EP-Prox exact-penalty proximal gradient solver."""

from .core.baselines import (
    BaselineResult,
    OracleTooLargeError,
    brute_force_dkbs,
    brute_force_dks,
    greedy_dks,
    tpm_dks,
)
from .core.ep_prox import (
    SolverDivergenceError,
    SolverState,
    ep_prox_solve,
    ep_prox_solve_bipartite,
    exactness_threshold,
    lipschitz_grad_constant,
    residual_bound_check,
)
from .core.ep_prox_config import SolverConfig
from .core.ep_prox_result import IterationRecord, SolverResult, trace_to_jsonl
from .core.graph import (
    BipartiteGraph,
    EdgeListParseError,
    Graph,
    load_edge_list,
    preprocess_bipartite,
    preprocess_unipartite,
)
from .core.metrics import DensityReport, bipartite_density, edge_density
from .utils.log import Log
