"""Hot loops for the samplers and the HMM forward recursion.

The compiled extension is used when it was built; otherwise (or when
STATMECH_PURE=1) the pure-Python module with identical signatures is used.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("STATMECH_PURE", "") != "1":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        pass

metropolis_spins = _impl.metropolis_spins
heat_bath_spins = _impl.heat_bath_spins
metropolis_table = _impl.metropolis_table
heat_bath_table = _impl.heat_bath_table
hmm_sample = _impl.hmm_sample
hmm_forward_increments = _impl.hmm_forward_increments


def backends():
    """Return {name: module} for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
