"""Build script for the optional compiled simplex kernels.

The package is fully functional without a C toolchain: if Cython or the
compiler is unavailable, or OPTILANG_PURE_PYTHON is set, the build skips
the extension and the solver falls back to the numpy kernels at import.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: skipping compiled kernels ({exc}); pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); pure-Python fallback will be used")


def make_extensions():
    if os.environ.get("OPTILANG_PURE_PYTHON"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "optilang.solve._kernels",
        ["src/optilang/solve/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=make_extensions(), cmdclass={"build_ext": OptionalBuildExt})
