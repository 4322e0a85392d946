"""Kernel backend selection.

The compiled Cython core is preferred when importable; the NumPy fallback
implements the same functions with identical semantics.  Set the
``LMSZPAIR_FORCE_PYTHON`` environment variable (to any non-empty value) to
force the fallback, e.g. for benchmarking.
"""

import os

from ._pyfallback import (  # noqa: F401  (kind constants are backend-independent)
    FIELD_CONSTANT,
    FIELD_OSCILLATING,
    FIELD_RAMP_HOMOG,
    FIELD_RAMP_SPIN1,
    FIELD_RAMP_SPIN2,
    FIELD_TABULATED,
    STATUS_MAX_STEPS,
    STATUS_OK,
    STATUS_STEP_UNDERFLOW,
)

if os.environ.get("LMSZPAIR_FORCE_PYTHON"):
    from . import _pyfallback as backend

    BACKEND_NAME = "python"
else:
    try:
        from . import _core as backend  # type: ignore[attr-defined]

        BACKEND_NAME = "compiled"
    except ImportError:
        from . import _pyfallback as backend

        BACKEND_NAME = "python"

propagate_linear_tdse = backend.propagate_linear_tdse
noisy_block_final = backend.noisy_block_final
kummer_m_dd = backend.kummer_m_dd
