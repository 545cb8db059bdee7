"""Select the compiled kernel module, falling back to pure Python.

Set GRIDWARD_PURE=1 to force the pure backend even when the extension
built; the test suite uses this to compare the two implementations.
"""

import os

if os.environ.get("GRIDWARD_PURE", "0") not in ("", "0"):
    from . import _pykernels as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as kernels

outlier_severities = kernels.outlier_severities
dtw_cost = kernels.dtw_cost
dtw_path = kernels.dtw_path
best_split = kernels.best_split
tree_apply = kernels.tree_apply
smo_solve = kernels.smo_solve


def backend_name() -> str:
    return kernels.BACKEND
