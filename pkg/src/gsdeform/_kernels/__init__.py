"""Hot-loop kernels: compiled extension with a pure-Python fallback.

The Metropolis sweep and the per-sweep domain/crossing measurement dominate
runtime, so they exist twice: a Cython extension (``_mc``) and a pure-Python
twin (``reference``) with identical semantics -- both consume the exact same
pre-generated random arrays, so a fixed seed yields bit-identical chains on
either backend.

Selection: the compiled backend is used when importable; set
``GSDEFORM_KERNEL=py`` or ``GSDEFORM_KERNEL=c`` to force one.
"""

import os

from . import reference

_choice = os.environ.get("GSDEFORM_KERNEL", "").lower()

if _choice == "py":
    active = reference
elif _choice == "c":
    from . import _mc as active  # noqa: F401  (ImportError here is deliberate)
else:
    try:
        from . import _mc as active
    except ImportError:  # pragma: no cover - depends on build environment
        active = reference

KERNEL_NAME = active.KERNEL_NAME


def backends():
    """Return the importable kernel modules, keyed by name."""
    out = {"py": reference}
    try:
        from . import _mc
    except ImportError:  # pragma: no cover
        pass
    else:
        out["c"] = _mc
    return out
