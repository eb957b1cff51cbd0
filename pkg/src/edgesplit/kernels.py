"""Kernel backend selection.

Imports the compiled extension when it is built, otherwise the pure-Python
twins. Set EDGESPLIT_PURE=1 to force the pure path (fallback testing, or the
compiled-vs-pure benchmark).
"""

import os
from array import array

if os.environ.get("EDGESPLIT_PURE") == "1":
    from edgesplit import _kernels_py as _impl

    BACKEND = "pure"
else:
    try:
        from edgesplit import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from edgesplit import _kernels_py as _impl

        BACKEND = "pure"


def as_vector(values) -> array:
    """Pack values into a float64 array accepted by both kernel backends."""
    if isinstance(values, array) and values.typecode == "d":
        return values
    return array("d", values)


rect_energy = _impl.rect_energy
first_nonincreasing = _impl.first_nonincreasing
first_negative = _impl.first_negative
quad_design_sums = _impl.quad_design_sums
quad_sse = _impl.quad_sse
exp_solve_at_rate = _impl.exp_solve_at_rate
spin = _impl.spin
