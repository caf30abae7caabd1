"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-numpy fallback
is used otherwise. ``AVMC_BACKEND`` overrides the choice: ``compiled``
(require the extension, raise if missing), ``python`` (force the fallback),
or ``auto`` (default).
"""

from __future__ import annotations

import os

_choice = os.environ.get("AVMC_BACKEND", "auto").lower()

if _choice not in ("auto", "compiled", "python"):
    raise RuntimeError(f"AVMC_BACKEND must be auto, compiled or python, got {_choice!r}")

if _choice == "python":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND = kernels.BACKEND_NAME


def get_kernels(name: str | None = None):
    """Return a kernels module by name (``compiled``/``python``), default the active one."""
    if name is None:
        return kernels
    if name == "python":
        from . import _kernels_py
        return _kernels_py
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
