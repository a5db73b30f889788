"""Select the integration kernel backend at import.

The compiled extension is used when it imports; otherwise the numpy
reference runs.  Set ``NETIMPORTANCE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

CONVERGED = _pykernels.CONVERGED
NOT_CONVERGED = _pykernels.NOT_CONVERGED
DIVERGED = _pykernels.DIVERGED

backend = _pykernels
if os.environ.get("NETIMPORTANCE_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as backend  # noqa: F811
    except ImportError:
        pass

BACKEND_NAME = "compiled" if backend is not _pykernels else "python"

try:
    from . import _ckernels  # noqa: F401
    COMPILED_AVAILABLE = True
except ImportError:
    COMPILED_AVAILABLE = False


def get_backend(name=None):
    """Return a kernel module by name (``"compiled"``, ``"python"``) or the default."""
    if name is None:
        return backend
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
