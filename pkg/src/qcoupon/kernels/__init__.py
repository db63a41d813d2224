"""Backend selection for the sampling hot loops.

The compiled extension is preferred when present; the NumPy fallback is
drop-in compatible and produces bit-identical results. Selection can be
forced with QCC_BACKEND=compiled|python|auto (default auto).
"""

from __future__ import annotations

import os

_choice = os.environ.get("QCC_BACKEND", "auto").lower()

if _choice not in ("auto", "compiled", "python"):
    raise ImportError(f"QCC_BACKEND must be auto, compiled or python, got {_choice!r}")

if _choice == "python":
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "compiled":
            raise ImportError(
                "QCC_BACKEND=compiled but the extension is not built; "
                "run `pip install -e .` or `python setup.py build_ext --inplace`"
            )
        from . import _pykernels as _impl

ACTIVE_BACKEND: str = _impl.BACKEND
period_chunk_counts = _impl.period_chunk_counts
collector_run = _impl.collector_run

__all__ = ["ACTIVE_BACKEND", "period_chunk_counts", "collector_run"]
