"""Select the compiled Hermite kernels when available, else numpy."""
from . import _hermite_py

try:
    from . import _hermite_ext
except ImportError:  # extension not built
    _hermite_ext = None

BACKEND = "cython" if _hermite_ext is not None else "python"
_impl = _hermite_ext if _hermite_ext is not None else _hermite_py

hermite_table = _impl.hermite_table
inv_christoffel = _impl.inv_christoffel
