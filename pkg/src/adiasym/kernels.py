"""Backend selection for the hot Pauli loops.

The compiled extension ``adiasym._kernels`` is used when it was built;
otherwise the numpy implementation in ``adiasym._kernels_py`` is loaded.
Setting ``ADIASYM_KERNELS=python`` forces the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ADIASYM_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def available_backends():
    """Names of kernel modules importable in this installation."""
    names = {"python": _kernels_py}
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        names["cython"] = _compiled
    return names


def apply_pauli(xs, zs, coefs, psi, out):
    _impl.apply_pauli(xs, zs, coefs, psi, out)


def z_diagonal(zs, coefs, dim):
    return _impl.z_diagonal(zs, coefs, dim)
