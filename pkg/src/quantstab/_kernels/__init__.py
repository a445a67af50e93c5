"""Kernel backend selection.

The compiled Cython extension is preferred; the numpy fallback is used when
it is missing. Set QUANTSTAB_KERNELS=pure or =compiled to force a backend
(the benchmark and the equivalence tests do this).
"""

import os

_forced = os.environ.get("QUANTSTAB_KERNELS", "").strip().lower()

if _forced == "pure":
    from . import _pure as impl
elif _forced == "compiled":
    from . import _core as impl  # ImportError here means the build is missing
else:
    try:
        from . import _core as impl
    except ImportError:
        from . import _pure as impl

BACKEND = impl.NAME
DIVERGENCE_GUARD = impl.DIVERGENCE_GUARD

ar_paths = impl.ar_paths
delta_mod_paths = impl.delta_mod_paths
gg_paths = impl.gg_paths
zoom_paths = impl.zoom_paths
uniform_quantize_array = impl.uniform_quantize_array
