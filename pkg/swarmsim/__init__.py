"""
Copyright (c) 2024 swarmsim contributors

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in
all copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN
THE SOFTWARE.
"""
from .about import __version__
from .adversary import AdversaryBehavior
from .adversary import ConstantPosition
from .adversary import OffsetPosition
from .adversary import PlacementStrategy
from .adversary import select_adversaries
from .adversary import SinusoidOffset
from .consensus import ConsensusGains
from .consensus import linear_consensus_control
from .consensus import NeighborSample
from .consensus import wmsr_control
from .consensus import wmsr_filter
from .control import ConnectivityControlParams
from .control import grad_lambda2
from .control import Lambda2Gradient
from .dynamics import AgentState
from .dynamics import FormationSpec
from .dynamics import ngon_formation
from .dynamics import step
from .exceptions import CapabilityError
from .exceptions import EstimatorError
from .exceptions import NonFiniteStateError
from .exceptions import NonSymmetricMatrixError
from .exceptions import ScenarioConfigError
from .exceptions import SwarmSimError
from .graph import algebraic_connectivity
from .graph import build_comm_graph
from .graph import CommParams
from .graph import laplacian
from .graph import spectrum
from .graph import WeightedGraph
from .harness import compute_metrics
from .harness import run_scenario
from .harness import RunResult
from .harness import write_outputs
from .robustness import analyze_robustness
from .robustness import is_r_robust
from .robustness import max_robustness
from .robustness import RobustnessReport
from .scenario import load_config
from .scenario import load_preset
from .scenario import ScenarioConfig
from .spectral import estimate_spectrum
from .spectral import PowerIterationParams


__all__ = [
    "__version__",
    "AdversaryBehavior",
    "AgentState",
    "CapabilityError",
    "CommParams",
    "ConnectivityControlParams",
    "ConsensusGains",
    "ConstantPosition",
    "EstimatorError",
    "FormationSpec",
    "Lambda2Gradient",
    "NeighborSample",
    "NonFiniteStateError",
    "NonSymmetricMatrixError",
    "OffsetPosition",
    "PlacementStrategy",
    "PowerIterationParams",
    "RobustnessReport",
    "RunResult",
    "ScenarioConfig",
    "ScenarioConfigError",
    "SinusoidOffset",
    "SwarmSimError",
    "WeightedGraph",
    "algebraic_connectivity",
    "analyze_robustness",
    "build_comm_graph",
    "compute_metrics",
    "estimate_spectrum",
    "grad_lambda2",
    "is_r_robust",
    "laplacian",
    "linear_consensus_control",
    "load_config",
    "load_preset",
    "max_robustness",
    "ngon_formation",
    "run_scenario",
    "select_adversaries",
    "spectrum",
    "step",
    "wmsr_control",
    "wmsr_filter",
    "write_outputs",
]
