"""Build script for the compiled CSR kernels.

The extension is optional: if compilation fails (no C toolchain, no Cython),
the package installs anyway and socrec.sparse falls back to the pure-Python
kernels at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "socrec._spmm_cy",
                ["src/socrec/_spmm_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    for ext in ext_modules:
        ext.optional = True
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
