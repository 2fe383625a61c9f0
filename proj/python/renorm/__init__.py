"""Python bindings for the renorm library."""

import json

from ._core import *  # noqa: F401,F403
from ._core import RenormError, _run_spec, _validate_spec

__version__ = "0.1.0"


def validate_spec(spec):
    """Issues for an experiment spec (dict); an empty list means runnable."""
    return _validate_spec(json.dumps(spec))


def run_spec(spec, write=False):
    """Run an experiment spec. Returns (report dict, csv text)."""
    report, csv = _run_spec(json.dumps(spec), write)
    return json.loads(report), csv


__all__ = [name for name in dir() if not name.startswith("_")]
