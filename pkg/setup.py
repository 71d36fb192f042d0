"""Build script: compiles the optional Cython integration kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so the extension is marked optional and build failures are
non-fatal.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "parmono._kernels._dopri_cy",
                sources=["src/parmono/_kernels/_dopri_cy.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
