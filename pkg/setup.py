"""Build shim: compiles the optional fast kernels when Cython is available.

The package is fully functional without the extension; tiba_sim.kernels
falls back to the NumPy reference implementation at import time.  Set
TIBA_SIM_NO_EXT=1 to skip the compile step entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("TIBA_SIM_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "tiba_sim._core",
                    ["src/tiba_sim/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no FMA contraction: the compiled kernels must round
                    # exactly like the NumPy reference, operation for
                    # operation, so the backends stay bit-identical
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
