"""Build hook for the optional compiled kernels.

The package is fully functional without the extension: edgesplit.kernels
falls back to the pure-Python twins when the build is skipped or fails.
Cython regenerates the C source when available; otherwise a previously
generated _kernels.c (shipped in sdists) is compiled directly.
"""

import os

from setuptools import Extension, setup

PYX = "src/edgesplit/_kernels.pyx"
GENERATED_C = "src/edgesplit/_kernels.c"

# -ffp-contract=off keeps the compiled sums bit-compatible with the
# pure-Python path (no FMA reassociation).
KERNEL_FLAGS = ["-O3", "-ffp-contract=off"]

ext_modules = []
if os.environ.get("EDGESPLIT_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("edgesplit._kernels", [PYX],
                       extra_compile_args=KERNEL_FLAGS, optional=True)],
            language_level=3,
        )
    elif os.path.exists(GENERATED_C):
        ext_modules = [Extension("edgesplit._kernels", [GENERATED_C],
                                 extra_compile_args=KERNEL_FLAGS,
                                 optional=True)]

setup(ext_modules=ext_modules)
