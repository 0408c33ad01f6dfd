"""Build script for the compiled kernel extension.

The extension is optional: without Cython or a C compiler the package
installs pure-Python and ssmap.backend selects the numpy kernels.
In-place build for development: python setup.py build_ext --inplace
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/ssmap/_hillcore.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    print("Cython not available; building without the compiled kernels")
    ext_modules = []

setup(ext_modules=ext_modules)
