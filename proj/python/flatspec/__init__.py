"""Neumann eigenvalue bounds for flat convex domains."""

import json as _json

from ._core import (
    SCHEMA_VERSION,
    ConvergenceError,
    EvaluationError,
    J_functional,
    Q,
    ResourceError,
    bessel_j,
    bessel_j_prime,
    bessel_zero,
    diameter,
    flatness,
    g_root,
    gauss_legendre,
    j01,
    john_ellipse,
    kroger_bound,
    neumann_eigs,
    neumann_eigs_thin,
    rectangle,
    regular_polygon,
    sl_eigs,
    sl_tent,
    symmetric_about_mediatrix,
    symmetric_trapezoid,
    tau,
    unit_base_triangle,
    verify_symmetric_bound,
)
from ._core import explicit_constant_json as _explicit_constant_json
from ._core import run_json as _run_json

__version__ = "0.1.0"


def explicit_constant():
    """I00, psi_1,3,5, tau, x0, M, the constant 4 j01^2 M and samples of Q."""
    return _json.loads(_explicit_constant_json())


def run(command, **options):
    """Run a harness command; returns (exit_code, result, stderr).

    Options use the config keys of the command-line tool (``h``, ``alpha``,
    ``shape``, ``polygon``, ...). The result is parsed when the format is JSON.
    """
    config = dict(options, command=command)
    code, out, err = _run_json(_json.dumps(config))
    if config.get("format", "json") == "json" and out:
        out = _json.loads(out)
    return code, out, err
