"""Spectral time-domain Maxwell slab solver with exact transparent boundaries."""

import json as _json

from ._core import (  # noqa: F401
    ConfigurationError,
    DataError,
    InvalidFrequencyError,
    LateralGrid,
    ShapeError,
    beta,
    capacity_matrix,
    continuity_constant,
    cq_weights,
    forward_lateral,
    hcurl_norm,
    inverse_lateral,
    l2_norm_slab,
    parseval_residual,
    run_scenario,
    solve_mode,
    suite_check_ids,
    trace_norm,
)
from ._core import run_check as _run_check
from ._core import symbol_audit as _symbol_audit


def symbol_audit(samples=10000, seed=20240601, eps=1.0, mu=1.0):
    """Randomized capacity-symbol audit; returns the report as a dict."""
    return _json.loads(_symbol_audit(samples, seed, eps, mu))


def run_check(check_id, seed=20240601, quick=True):
    """Run one verification check; returns the CheckResult as a dict."""
    return _json.loads(_run_check(check_id, seed, quick))
