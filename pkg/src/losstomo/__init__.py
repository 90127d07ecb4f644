"""Loss tomography for multi-source multicast networks."""

from .topology import Topology, TopologyError, UnsupportedTopologyError, ancestors, parse_topology
from .decompose import DTreePlan, decompose
from .probes import ObservationSet, PooledCounts, count_pass, gamma_hat, simulate
from .estimators import EstimateSet, estimate_network
from .harness import ExperimentConfig, emit, run_experiment

__all__ = [
    "Topology",
    "TopologyError",
    "UnsupportedTopologyError",
    "ancestors",
    "parse_topology",
    "DTreePlan",
    "decompose",
    "ObservationSet",
    "PooledCounts",
    "count_pass",
    "gamma_hat",
    "simulate",
    "EstimateSet",
    "estimate_network",
    "ExperimentConfig",
    "emit",
    "run_experiment",
]
