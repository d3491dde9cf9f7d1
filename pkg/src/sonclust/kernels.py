"""Selects the compiled edge kernels when available, else the numpy fallback.

Set ``SONCLUST_PURE_PYTHON=1`` before import to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("SONCLUST_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_py as _impl
else:
    from . import _kernels_py as _impl

edge_diff = _impl.edge_diff
edge_scatter = _impl.edge_scatter
column_norms = _impl.column_norms
project_balls = _impl.project_balls
soft_threshold_columns = _impl.soft_threshold_columns
jacobian_matvec = _impl.jacobian_matvec

__all__ = [
    "BACKEND",
    "edge_diff",
    "edge_scatter",
    "column_norms",
    "project_balls",
    "soft_threshold_columns",
    "jacobian_matvec",
]
