"""Builds the optional Cython extension with the hot kernels.

The package is fully functional without it (NumPy fallback); install with
``pip install -e . --no-build-isolation``.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "hquant._core",
        ["src/hquant/_core.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
