"""Build script for the compiled kernel extension.

The package works without the extension (a pure numpy fallback is selected
at import time), so a missing compiler or Cython only costs speed.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"building the geoas._kernels._core extension failed ({exc}); "
            "falling back to the pure-Python kernels"
        )


extensions = [
    Extension(
        "geoas._kernels._core",
        ["src/geoas/_kernels/_core.pyx"],
        # fp-contract off keeps compiled results bitwise equal to the
        # pure backend, so outputs do not depend on the backend chosen.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        extensions, compiler_directives={"language_level": "3"}
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
