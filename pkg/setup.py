"""Build script for the compiled Monte Carlo kernels.

The package works without the extension (a vectorized NumPy fallback is
selected at import time), but the compiled kernels are what make
acceptance-scale trial counts practical, so the build treats them as
required. ``-ffp-contract=off`` disables FMA contraction so the compiled
kernels execute the same IEEE-754 operation sequence as the pure backend,
keeping the two bit-identical on the KMC paths.
"""

from Cython.Build import cythonize
from setuptools import setup
from setuptools.extension import Extension

extensions = [
    Extension(
        "patchbind.backend._kernels",
        ["src/patchbind/backend/_kernels.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        language_level="3",
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
