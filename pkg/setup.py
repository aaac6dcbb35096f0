"""Build hook for the optional compiled kernels.

The package is pure Python; ``infopolicy._kernels`` is a Cython extension
that accelerates the brute-force oracle.  If Cython or a C compiler is
missing the install proceeds without it and the numpy fallback is used.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "infopolicy._kernels",
                ["src/infopolicy/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
