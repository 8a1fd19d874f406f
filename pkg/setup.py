"""Build script: compiles the optional merge-cascade extension.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time), so a missing Cython or a failed
compile is not fatal.
"""

import os

from setuptools import Extension, setup

PYX = "src/pdfalearn/_speedups.pyx"

ext_modules = []
if os.path.exists(PYX):
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "pdfalearn._speedups",
            sources=[PYX],
            include_dirs=[numpy.get_include()],
            language="c++",
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
            },
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
