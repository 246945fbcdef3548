"""Kernel backend selection.

The compiled extension (``revanneal._core``) is used when it imported
successfully; otherwise the NumPy fallback takes over.  Set the environment
variable ``REVANNEAL_BACKEND`` to ``pure`` or ``compiled`` to force one side
(forcing ``compiled`` raises if the extension is unavailable).
"""

from __future__ import annotations

import os

from . import _purepy

_choice = os.environ.get("REVANNEAL_BACKEND", "auto").lower()

_compiled = None
if _choice in ("auto", "compiled"):
    try:
        from . import _core as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None
        if _choice == "compiled":
            raise ImportError(
                "REVANNEAL_BACKEND=compiled but revanneal._core is not built"
            )

kernels = _compiled if _compiled is not None else _purepy
BACKEND = "compiled" if _compiled is not None else "pure"
HAS_COMPILED = _compiled is not None


def get_backend(name: str = "active"):
    """Return a kernel module by name: 'active', 'pure' or 'compiled'."""
    if name == "active":
        return kernels
    if name == "pure":
        return _purepy
    if name == "compiled":
        if _compiled is None:
            # honour a forced-pure environment but still allow explicit access
            try:
                from . import _core
                return _core
            except ImportError:
                raise ImportError("compiled backend not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
