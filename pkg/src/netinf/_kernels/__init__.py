"""Kernel backend selection.

The compiled extension is used when it was built and ``NETINF_PURE_PYTHON``
is unset; otherwise the NumPy reference implementation is used.
"""

import os

from . import _lars_py

BACKEND = "python"
lars_gram = _lars_py.lars_gram

if not os.environ.get("NETINF_PURE_PYTHON"):
    try:
        from . import _lars_c
    except ImportError:
        _lars_c = None
    else:
        lars_gram = _lars_c.lars_gram
        BACKEND = "cython"
else:
    _lars_c = None

COMPLETE = _lars_py.COMPLETE
MAX_KNOTS = _lars_py.MAX_KNOTS
BUDGET_REACHED = _lars_py.BUDGET_REACHED
NOT_PD = _lars_py.NOT_PD
