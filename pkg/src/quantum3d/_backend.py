"""Select the coefficient kernel implementation at import time.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module is used.  Setting ``QUANTUM3D_PURE_PYTHON=1``
forces the fallback.
"""

import os

if os.environ.get("QUANTUM3D_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kern
else:
    try:
        from . import _ckernels as kern  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as kern

BACKEND = "compiled" if kern.__name__.endswith("_ckernels") else "python"

from ._pykernels import EMPTY, FIELD_BITS, MAX_VARS, ExponentOverflow  # noqa: E402

poly_add = kern.poly_add
poly_sub = kern.poly_sub
poly_neg = kern.poly_neg
poly_scale = kern.poly_scale
poly_mul = kern.poly_mul
series_add = kern.series_add
series_sub = kern.series_sub
series_neg = kern.series_neg
series_scale = kern.series_scale
series_mul = kern.series_mul
series_is_zero = kern.series_is_zero
series_low = kern.series_low
accumulate = kern.accumulate

__all__ = [
    "BACKEND", "EMPTY", "FIELD_BITS", "MAX_VARS", "ExponentOverflow",
    "poly_add", "poly_sub", "poly_neg", "poly_scale", "poly_mul",
    "series_add", "series_sub", "series_neg", "series_scale", "series_mul",
    "series_is_zero", "series_low", "accumulate",
]
