"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-numpy fallback is selected at
import time); the extension just makes the hot Monte Carlo kernels faster.
`-ffp-contract=off` keeps the compiled arithmetic bitwise identical to the
numpy fallback (no fused multiply-adds).
"""

from setuptools import Extension, setup

import numpy

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "kslab._kernels._ckernels",
                ["src/kslab/_kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=extensions)
