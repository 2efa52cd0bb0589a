"""Build configuration for the optional compiled kernels.

The package works without the extension: if Cython or a C compiler is
missing, ``stokes_qsl.kernels`` falls back to the NumPy implementation.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "stokes_qsl._ckernels",
                ["src/stokes_qsl/_ckernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
