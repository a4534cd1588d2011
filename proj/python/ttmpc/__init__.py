"""Trajectory-tracking control for an autonomous tractor-trailer.

Error-model-based linear MPC combined with feedforward and tube-based
robust control, plus a deterministic closed-loop simulator. The heavy
lifting lives in the compiled extension module.
"""

from ._ttmpc import *  # noqa: F401,F403
from ._ttmpc import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
