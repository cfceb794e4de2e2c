"""Build script: compiles the optional exact-arithmetic kernel extension.

The package works without the extension (a pure-Python twin of every
kernel is selected at import time); building it just makes the hot loops
run at C speed.  Set DTDERAND_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("DTDERAND_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/dtderand/_kern_c.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
