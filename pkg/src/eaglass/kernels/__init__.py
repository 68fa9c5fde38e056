"""Kernel backend selection.

The compiled Cython extension is preferred when importable; the pure numpy
backend is a drop-in fallback. EAGLASS_BACKEND=pure|compiled|auto overrides
(auto is the default). Backends differ only in speed: enumeration kernels
agree to float rounding, Monte Carlo kernels bit-exactly.
"""

import os

_requested = os.environ.get("EAGLASS_BACKEND", "auto")
if _requested not in ("auto", "compiled", "pure"):
    raise RuntimeError(f"EAGLASS_BACKEND={_requested!r} (expected auto, compiled, or pure)")

if _requested == "pure":
    from . import pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import pure as _impl  # type: ignore[no-redef]

        BACKEND = "pure"

all_energies = _impl.all_energies
inner_sums = _impl.inner_sums
pair_histogram = _impl.pair_histogram
mc_sweeps = _impl.mc_sweeps

__all__ = ["BACKEND", "all_energies", "inner_sums", "pair_histogram", "mc_sweeps"]
