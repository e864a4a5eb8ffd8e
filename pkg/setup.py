"""Build hook for the optional compiled kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing Cython or C compiler must not fail the install.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "taskrisk.kernels._ckernels",
                ["src/taskrisk/kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps the C arithmetic bit-for-bit in
                # step with the NumPy fallback (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
