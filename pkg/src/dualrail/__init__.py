"""Dual-rail photonic network simulator.

Photons are polynomials in creation operators over (site, polarization)
modes, and every optical element is a linear substitution applied tick by
tick.  The planner computes phase schedules that route photons to chosen
free ports; a dense-matrix oracle cross-checks the engine.
"""

from importlib import resources

from .analysis import count_reachable, exit_distribution, fidelity, reduced_polarization_dm
from .engine import Insertion, PhaseSchedule, Trace, run_all_bell, simulate, step
from .fock import Mode, PhotonState, inner_product, make_bell
from .planner import UnreachableError, plan, reachable_exits
from .topology import Endpoint, Topology, layered_tree

__version__ = "0.1.0"


def bundled_scenario(name: str):
    """Path-like handle to one of the scenarios shipped with the package."""
    return resources.files(__name__).joinpath("scenarios", f"{name}.yaml")


__all__ = [
    "Endpoint",
    "Insertion",
    "Mode",
    "PhaseSchedule",
    "PhotonState",
    "Topology",
    "Trace",
    "UnreachableError",
    "bundled_scenario",
    "count_reachable",
    "exit_distribution",
    "fidelity",
    "inner_product",
    "layered_tree",
    "make_bell",
    "plan",
    "reachable_exits",
    "reduced_polarization_dm",
    "run_all_bell",
    "simulate",
    "step",
]
