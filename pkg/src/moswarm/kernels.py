"""Selects the rollout implementation at import time.

The compiled extension is used when it imports cleanly, unless the
environment variable ``MOSWARM_PURE_PYTHON`` is set to a non-empty value
other than ``0``. ``BACKEND`` names the active choice.
"""

import os

from . import _rollout_py

python_rollout = _rollout_py.rollout

try:
    from . import _rollout as _compiled
except ImportError:  # extension not built
    _compiled = None

compiled_rollout = _compiled.rollout if _compiled is not None else None

if compiled_rollout is not None and os.environ.get("MOSWARM_PURE_PYTHON", "") in ("", "0"):
    rollout = compiled_rollout
    BACKEND = "cython"
else:
    rollout = python_rollout
    BACKEND = "python"
