"""Kernel dispatch: the compiled extension when built, numpy otherwise.

Set ``NBGROWTH_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("NBGROWTH_PURE_PYTHON"):
    from ._pykernels import cw_bounds, nb_matvec, power_iterate

    BACKEND = "python"
else:
    try:
        from ._ckernels import cw_bounds, nb_matvec, power_iterate

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._pykernels import cw_bounds, nb_matvec, power_iterate

        BACKEND = "python"

__all__ = ["BACKEND", "cw_bounds", "nb_matvec", "power_iterate"]
