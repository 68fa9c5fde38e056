"""Build script for the compiled kernel extension.

The package works without the extension (eaglass.kernels falls back to the
pure numpy backend), so a failed compile only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "eaglass.kernels._core",
                sources=["src/eaglass/kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
