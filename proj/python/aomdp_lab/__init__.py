"""Python access to the aomdp simulation harness."""

import json

from . import _core
from ._core import ProtocolError, __version__, kalman_filter, splitmix64


def run_plan(plan, write=False):
    """Run a plan given as a dict. Returns the summary rows and any episode errors."""
    return json.loads(_core.run_plan(json.dumps(plan), write))


def generate_users(scenario):
    return json.loads(_core.generate_users(json.dumps(scenario)))


__all__ = ["ProtocolError", "__version__", "generate_users", "kalman_filter", "run_plan", "splitmix64"]
