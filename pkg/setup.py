"""Build the optional Cython split-scan kernel.

The package works without it: ``founder_success.ml.kernels`` falls back to
the numpy implementation when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("FS_NO_EXTENSIONS") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "founder_success.ml._splitscan",
                    ["src/founder_success/ml/_splitscan.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
