"""Numerical kernel backend selection.

Imports the compiled extension when it is available and falls back to
the pure-Python implementation otherwise. Set ``CATNET_PURE_PY=1`` to
force the fallback (useful for benchmarking and debugging).
"""

import os

from . import _pykernels

if os.environ.get("CATNET_PURE_PY") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "compiled"

# status codes are shared between backends
NEWTON_OK = _pykernels.NEWTON_OK
NEWTON_NO_CONVERGENCE = _pykernels.NEWTON_NO_CONVERGENCE
NEWTON_SINGULAR = _pykernels.NEWTON_SINGULAR
NEWTON_JUMP = _pykernels.NEWTON_JUMP
RELAX_OK = _pykernels.RELAX_OK
RELAX_BUDGET = _pykernels.RELAX_BUDGET
RELAX_ESCAPED = _pykernels.RELAX_ESCAPED
TRACK_OK = _pykernels.TRACK_OK
TRACK_RELAX_FAILED = _pykernels.TRACK_RELAX_FAILED
TRACK_ESCAPED = _pykernels.TRACK_ESCAPED

potential = _impl.potential
gradient = _impl.gradient
hessian = _impl.hessian
newton = _impl.newton
relax = _impl.relax
signatures = _impl.signatures
track_path = _impl.track_path
