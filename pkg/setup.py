"""Builds the optional compiled trial loop; the package imports without it."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    setup()
else:
    extensions = [
        Extension(
            "sdrls._kernel",
            ["src/sdrls/_kernel.pyx"],
            extra_compile_args=["-O3"],
            optional=True,
        )
    ]
    setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
