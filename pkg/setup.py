"""Build script.

The package is pure Python plus one optional Cython extension holding the
per-pixel kernels. If Cython or a C compiler is unavailable the install
still succeeds and the numpy fallback kernels are used at runtime.
Set DEPTHPROJ_PURE=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DEPTHPROJ_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "depthproj._kernels._speed",
                    ["src/depthproj/_kernels/_speed.pyx"],
                    optional=True,
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
