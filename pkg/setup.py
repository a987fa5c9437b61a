from setuptools import Extension, setup

from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "enorbit._speedups",
                ["src/enorbit/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    ),
)
