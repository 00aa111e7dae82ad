"""Python access to the contextua library.

Models and configs are plain dicts in the model.v1 and experiment config
layouts used by the command-line tool.
"""

import json
from fractions import Fraction

from . import _contextua
from ._contextua import ContextuaError, __version__

__all__ = [
    "ContextuaError",
    "__version__",
    "fixture_names",
    "fixture",
    "contextual_fraction",
    "success_probability",
    "no_signalling",
    "run",
]


def _prob(value):
    """Exact "n/d" strings become Fractions, inexact values floats."""
    if isinstance(value, str):
        return Fraction(value)
    return float(value)


def _model_text(model):
    if isinstance(model, str):
        return _contextua.fixture_json(model)
    return json.dumps(model)


def fixture_names():
    return list(_contextua.fixture_names())


def fixture(name):
    return json.loads(_contextua.fixture_json(name))


def contextual_fraction(model, exact=False):
    """Returns (ncf, cf) for a fixture name or a model.v1 dict."""
    r = json.loads(_contextua.contextual_fraction(_model_text(model), exact))
    return _prob(r["ncf"]), _prob(r["cf"])


def success_probability(model, game):
    return _prob(json.loads(_contextua.success_probability(_model_text(model), game)))


def no_signalling(model):
    return _contextua.no_signalling(_model_text(model))


def run(config):
    """Runs an experiment config dict and returns the result envelope."""
    return json.loads(_contextua.run(json.dumps(config)))
