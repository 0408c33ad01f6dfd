"""Numeric kernel selection.

The compiled extension (ssmap._hillcore, Cython) is preferred when it
imported cleanly; otherwise the numpy fallback (ssmap._hillcore_py) is
used. Set SSMAP_BACKEND=python or SSMAP_BACKEND=compiled to force one;
forcing the compiled backend raises if the extension is unavailable.
"""

from __future__ import annotations

import os

from . import _hillcore_py

_FORCED = os.environ.get("SSMAP_BACKEND", "").strip().lower()

_compiled = None
if _FORCED != "python":
    try:
        from . import _hillcore as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None
        if _FORCED == "compiled":
            raise ImportError(
                "SSMAP_BACKEND=compiled but ssmap._hillcore is not built; "
                "run 'python setup.py build_ext --inplace' or reinstall"
            )

_active = _compiled if _compiled is not None else _hillcore_py


def kernel():
    """The active kernel module (eval_many, jacobian_many, ...)."""
    return _active


def backend_name() -> str:
    return _active.BACKEND_NAME


def available_backends() -> dict[str, object]:
    out: dict[str, object] = {"python": _hillcore_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
