"""Selects the interleaving-search kernel at import time.

The compiled extension ``tmkit._interleave`` is used when it was built;
otherwise, or when ``TMKIT_PURE_PYTHON`` is set, the pure-Python version runs.
Both return identical results.
"""

from __future__ import annotations

import os

from . import _interleave_py

BACKEND = "python"

if not os.environ.get("TMKIT_PURE_PYTHON"):
    try:
        from . import _interleave as _compiled
    except ImportError:  # extension not built
        _compiled = None
    else:
        BACKEND = "cython"
else:
    _compiled = None

python_enumerate = _interleave_py.enumerate_encoded
compiled_enumerate = _compiled.enumerate_encoded if _compiled is not None else None
enumerate_encoded = compiled_enumerate or python_enumerate
