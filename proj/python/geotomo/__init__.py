"""Python access to the geotomo numerical checks."""

import json

from . import _geotomo
from ._geotomo import (
    christoffel,
    dn_map,
    fit_slope,
    g0_operator_norm,
    geodesic_exit_time,
    geometric_ladder,
    santalo_relative_error,
)


def run_suite(config_path, suite, out_dir=None):
    """Run a suite and return its report as a dict."""
    return json.loads(_geotomo.run_suite_json(config_path, suite, out_dir or ""))


__all__ = [
    "christoffel",
    "dn_map",
    "fit_slope",
    "g0_operator_norm",
    "geodesic_exit_time",
    "geometric_ladder",
    "run_suite",
    "santalo_relative_error",
]
