import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off keeps the compiled kernels bit-identical to the numpy
# fallback (no FMA contraction of a*x + b*u).
setup(
    ext_modules=cythonize(
        [
            Extension(
                "quantstab._kernels._core",
                ["src/quantstab/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
)
