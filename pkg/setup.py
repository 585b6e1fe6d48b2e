"""Builds the optional Cython scoring kernel.

The package works without it: medplat.vecindex.kernels falls back to the
numpy implementation when the extension is absent.
"""

import numpy
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "medplat.vecindex._ckernels",
                sources=["src/medplat/vecindex/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
