"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the extension only accelerates the hot
characteristic-quadrature loops.  OpenMP is used when the toolchain supports
it, otherwise the kernels run single-threaded.
"""

import os
import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    openmp = sys.platform != "win32" and os.environ.get("BROADWELL4_NO_OPENMP") != "1"
    ext = Extension(
        "broadwell4._kernels",
        ["src/broadwell4/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"] + (["-fopenmp"] if openmp else []),
        extra_link_args=["-fopenmp"] if openmp else [],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    # No Cython available: install with the NumPy backend only.
    pass

setup(ext_modules=ext_modules)
