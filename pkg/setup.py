"""Build script: compiles the optional rollout speedup extension.

The package is fully functional without the extension (a pure-Python twin
of the kernel is selected at import time), so compilation failures are
tolerated rather than fatal.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext = Extension(
        "assistlearn._speedups",
        ["src/assistlearn/_speedups.pyx"],
    )
    ext.optional = True
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
