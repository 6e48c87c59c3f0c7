"""Build script: compiles the streaming DSP kernels as a C extension.

The package works without the extension (a pure scipy/numpy fallback is
selected at import time), so a missing Cython toolchain only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("ecgstream._kernels_cy", ["src/ecgstream/_kernels_cy.pyx"])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
