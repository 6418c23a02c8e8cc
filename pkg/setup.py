import os

from setuptools import setup

# The compiled kernels are optional: the package falls back to the pure
# numpy implementations when the extension is absent. Set RELMETRIC_NO_EXT=1
# to skip compilation entirely.
ext_modules = []
if os.environ.get("RELMETRIC_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        # No -ffast-math: the pure and compiled backends are tested for
        # close numerical agreement, which fast-math reassociation breaks.
        ext_modules = cythonize(
            [
                Extension(
                    "relmetric._kernels._native",
                    ["src/relmetric/_kernels/_native.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
