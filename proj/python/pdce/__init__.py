"""Python front end for the pdce simulator.

Scenario and sweep configs are plain dicts (or built-in names); manifests come
back as dicts and time series as numpy arrays.
"""

import json as _json

from . import _pdce
from ._pdce import (
    ConvergenceFailure,
    DomainError,
    IntegrationFailure,
    InvalidDimension,
    ModelParams,
    PdceError,
    TruncationOverflow,
    analytic_state,
    builtin_scenarios,
    derived_constants,
    mandel_q_analytic,
    n_casimir,
    quad_variances_analytic,
    validity_limit,
    wigner,
)

SCHEMA_VERSION = _pdce.SCHEMA_VERSION
DISSIPATOR_NOTE = _pdce.DISSIPATOR_NOTE


def _arg(cfg):
    return cfg if isinstance(cfg, str) else _json.dumps(cfg)


def scenario_config(scenario):
    """Full config dict of a built-in name or a (partial) config dict."""
    return _json.loads(_pdce.scenario_json(_arg(scenario)))


def compute_scenario(scenario, dim=None, fixed_step=False, check_convergence=True):
    """Returns (tables, manifest); tables maps file stem -> {column: ndarray}."""
    tables, manifest = _pdce.compute_scenario(_arg(scenario), dim, fixed_step, check_convergence)
    return tables, _json.loads(manifest)


def run_scenario(scenario, out_dir, dim=None, fixed_step=False, check_convergence=True):
    return _json.loads(_pdce.run_scenario(_arg(scenario), str(out_dir), dim, fixed_step, check_convergence))


def run_sweep(config, out_dir, jobs=1):
    return _json.loads(_pdce.run_sweep(_arg(config), str(out_dir), jobs))


__all__ = [
    "ConvergenceFailure",
    "DISSIPATOR_NOTE",
    "DomainError",
    "IntegrationFailure",
    "InvalidDimension",
    "ModelParams",
    "PdceError",
    "SCHEMA_VERSION",
    "TruncationOverflow",
    "analytic_state",
    "builtin_scenarios",
    "compute_scenario",
    "derived_constants",
    "mandel_q_analytic",
    "n_casimir",
    "quad_variances_analytic",
    "run_scenario",
    "run_sweep",
    "scenario_config",
    "validity_limit",
    "wigner",
]
