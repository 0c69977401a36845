"""Backend selection for the hot time-stepping loops.

The compiled Cython module is preferred when present; the pure-numpy module
is a drop-in replacement.  Set ``KOOPMANGL_BACKEND=pure`` to force the
fallback or ``KOOPMANGL_BACKEND=compiled`` to fail loudly if the extension
is missing.
"""

import os

_requested = os.environ.get("KOOPMANGL_BACKEND", "auto").strip().lower()

if _requested in ("auto", "", "compiled"):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "KOOPMANGL_BACKEND=compiled but the koopmangl._kernels._core "
                "extension is not built"
            )
        from . import _pure as _impl

        BACKEND = "pure"
elif _requested in ("pure", "python"):
    from . import _pure as _impl

    BACKEND = "pure"
else:
    raise ValueError(f"unrecognized KOOPMANGL_BACKEND value {_requested!r}")

simulate_hereditary_2d = _impl.simulate_hereditary_2d
rollout_memory = _impl.rollout_memory
rollout_companion = _impl.rollout_companion


def backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'pure'."""
    return BACKEND
