"""Builds the optional compiled integrator kernel.

The package works without it (a pure-Python twin is selected at import
time); the extension only speeds up the inner RK4 loop.  Floating-point
contraction is disabled so both kernels produce bit-identical trajectories.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "telesim._kernels._plant_cy",
                ["src/telesim/_kernels/_plant_cy.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
