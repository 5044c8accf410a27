"""Select the pivot kernel at import time.

The compiled extension is used when it was built and
``MILPRET_PURE_PYTHON`` is not set to a true value; otherwise the numpy
implementation is used.  Both produce identical tableaux.
"""

import os

from . import _pykernel

BACKEND = "python"
pivot = _pykernel.pivot

if os.environ.get("MILPRET_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _ckernel
    except ImportError:  # extension not built
        pass
    else:
        pivot = _ckernel.pivot
        BACKEND = "cython"
