"""Rate-tunable control barrier function toolkit.

The compiled module carries the solvers, the class-K chain integrator, the
trust metrics and the scenario runner; this package is a thin shim so both
installed wheels (rtcbf/_rtcbf.so) and in-tree builds (_rtcbf.so on
PYTHONPATH) import the same way.
"""

import json as _json

try:
    from ._rtcbf import *  # noqa: F401,F403
    from . import _rtcbf as _core
except ImportError:
    from _rtcbf import *  # noqa: F401,F403
    import _rtcbf as _core

__all__ = [n for n in dir(_core) if not n.startswith("_")] + ["run"]


def run(config):
    """Run a scenario from a dict (or a JSON string) and return the log."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _core.run_scenario(config)
