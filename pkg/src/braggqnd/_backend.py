"""Kernel backend selection.

The compiled numba kernels are the default. Set BRAGGQND_DISABLE_NUMBA=1
in the environment (before import) to force the pure-numpy fallback; the
fallback is also used automatically when numba cannot be imported.
"""

import os
import warnings


def _disabled() -> bool:
    return os.environ.get("BRAGGQND_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


_BACKEND = "numpy"
if not _disabled():
    try:
        from . import _kernels_numba as _impl

        _BACKEND = "numba"
    except ImportError:
        warnings.warn("numba unavailable, using the pure-numpy kernels", RuntimeWarning)
        from . import _kernels_numpy as _impl
else:
    from . import _kernels_numpy as _impl

propagate_grid = _impl.propagate_grid
collapse_trials = _impl.collapse_trials


def backend_name() -> str:
    """Active kernel implementation: "numba" or "numpy"."""
    return _BACKEND
