"""Kernel backend selection.

The compiled extension is preferred when present; ``INFOPOLICY_BACKEND=numpy``
forces the pure-numpy fallback, ``INFOPOLICY_BACKEND=compiled`` demands the
extension and fails loudly when it is missing.
"""

import os

from . import _kernels_np

_forced = os.environ.get("INFOPOLICY_BACKEND", "").strip().lower()

if _forced in ("numpy", "python", "py"):
    _impl = _kernels_np
    BACKEND = "numpy"
elif _forced in ("", "compiled", "c", "cython"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _forced:
            raise ImportError(
                "INFOPOLICY_BACKEND=compiled but infopolicy._kernels is not built; "
                "run `python setup.py build_ext --inplace`"
            )
        _impl = _kernels_np
        BACKEND = "numpy"
else:
    raise ValueError(f"unknown INFOPOLICY_BACKEND value {_forced!r}")

best_pair = _impl.best_pair
best_triple = _impl.best_triple
