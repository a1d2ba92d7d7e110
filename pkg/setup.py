"""Build the optional Cython kernels.

The extension is best-effort: if Cython or a C compiler is unavailable the
package still installs and falls back to ``exchev._kernels_py``.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("EXCHEV_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "exchev._kernels",
                    ["src/exchev/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
