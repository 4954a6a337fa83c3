"""Build script: compiles the optional similarity kernels.

The compiled extension is an accelerator only; if Cython or a C compiler
is unavailable the build falls back to the pure-Python kernels selected
at import time in routeforge.kernels.
"""

import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build extensions, but never fail the install over them."""

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
        print(
            f"WARNING: building the compiled kernels failed ({exc}); "
            "routeforge will use the pure-Python fallback.",
            file=sys.stderr,
        )


def _extensions():
    if os.environ.get("ROUTEFORGE_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "WARNING: Cython not available; skipping compiled kernels.",
            file=sys.stderr,
        )
        return []
    return cythonize(
        ["src/routeforge/kernels/_ckernels.pyx"],
        language_level=3,
    )


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
