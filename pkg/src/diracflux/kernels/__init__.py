"""Stepping-kernel backend selection.

The compiled Cython backend is preferred when its extension module built;
otherwise the pure-numpy fallback is used.  Set ``DIRACFLUX_KERNEL`` to
``numpy`` or ``compiled`` to force a backend (``compiled`` raises if the
extension is unavailable).  Both backends produce bit-identical fields.
"""

from __future__ import annotations

import os

from . import _numpy as numpy_backend

_requested = os.environ.get("DIRACFLUX_KERNEL", "").strip().lower()
if _requested not in ("", "numpy", "compiled"):
    raise RuntimeError(
        f"DIRACFLUX_KERNEL={_requested!r}: expected 'numpy' or 'compiled'"
    )

if _requested == "numpy":
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _compiled as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = numpy_backend
        BACKEND = "numpy"

FREE = numpy_backend.FREE
DIRICHLET = numpy_backend.DIRICHLET

run_span = _impl.run_span
run_viscous = _impl.run_viscous


def get_backend(name: str):
    """Return a specific backend module (for benchmarks and parity tests)."""
    if name == "numpy":
        return numpy_backend
    if name == "compiled":
        from . import _compiled  # type: ignore[attr-defined]

        return _compiled
    raise ValueError(f"unknown backend {name!r}")
