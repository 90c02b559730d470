"""Build script: compiles the optional fast kernels.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a failed compile only costs speed.
"""

from setuptools import setup
from setuptools.errors import CCompilerError, ExecError, PlatformError

ext_modules = []
try:
    from setuptools import Extension
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "itforge.kernels._native",
                ["src/itforge/kernels/_native.pyx"],
                extra_compile_args=["-O3", "-funroll-loops"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass


def run_setup(with_ext: bool) -> None:
    setup(ext_modules=ext_modules if with_ext else [])


try:
    run_setup(bool(ext_modules))
except (CCompilerError, ExecError, PlatformError):
    run_setup(False)
