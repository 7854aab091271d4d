"""Build the compiled monitoring kernel.

The extension is optional at runtime: if it is missing (or the build is
skipped), the package falls back to the pure-Python kernel selected in
``blindmon._kernel``.
"""

from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "blindmon._kernel._core",
        ["src/blindmon/_kernel/_core.pyx"],
        # -ffp-contract=off keeps the C kernel bit-compatible with the
        # pure-Python twin (no fused multiply-add contraction).
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
