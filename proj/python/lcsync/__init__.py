"""Synchronization analysis of linearly coupled networks with time-varying coupling."""

import json as _json

from ._core import (
    BlinkingParams,
    CouplingSchedule,
    DivergenceError,
    RankCollapseError,
    blinking_schedule,
    consensus_equivalence_check,
    estimate_mu,
    finite_difference_jacobian,
    floquet_multipliers,
    fundamental_matrix,
    hajnal_diameter_linear,
    hajnal_diameter_matrix,
    has_spanning_tree,
    integrate_coupling,
    integrate_network,
    integrate_ode,
    interval_graph,
    laplacian_from_adjacency,
    projection_basis,
    ring_adjacency,
    rossler_eval,
    rossler_jacobian,
    scrambling_coefficient,
    sync_criterion,
    sync_energy,
    sync_error_series,
    transverse_exponent,
    variational_matrix_lcode,
    _simulate_json,
    _spectrum_json,
    _sweep_json,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["simulate", "spectrum", "sweep"]


def simulate(config, seed=None):
    """Run a synchronization experiment from a config dict; returns a summary dict."""
    return _json.loads(_simulate_json(_json.dumps(config), seed))


def spectrum(config, seed=None):
    """mu, varsigma, diameter and Floquet data for a config dict."""
    return _json.loads(_spectrum_json(_json.dumps(config), seed))


def sweep(config, seed=None, threads=1):
    """Coupling-strength sweep; returns a list of row dicts in sigma order."""
    return _json.loads(_sweep_json(_json.dumps(config), seed, threads))
