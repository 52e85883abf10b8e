"""Build script for the optional compiled kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile should not block installation from source:
use  pip install -e . --no-build-isolation  and check
``minorant.kernel_backend()`` afterwards.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "minorant._kernels._fast",
                ["src/minorant/_kernels/_fast.pyx"],
            )
        ],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
