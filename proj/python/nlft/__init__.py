"""Continuous nonlinear Fourier transform toolkit (C++ core)."""

import json

from ._core import (
    E,
    NlftError,
    Potential,
    check_ids,
    densities,
    fixture,
    fixture_id,
    kernel,
    sinc_kernel,
    transfer,
    zeros,
)
from ._core import default_config as _default_config
from ._core import verify as _verify

__all__ = [
    "E",
    "NlftError",
    "Potential",
    "check_ids",
    "default_config",
    "densities",
    "fixture",
    "fixture_id",
    "kernel",
    "sinc_kernel",
    "transfer",
    "verify",
    "zeros",
]


def default_config():
    """Default run configuration as a dict."""
    return json.loads(_default_config())


def verify(config):
    """Run the check suite for a config dict; returns the list of report dicts."""
    return json.loads(_verify(json.dumps(config)))
