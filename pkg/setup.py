"""Build hook: compile the truncated-product kernel when Cython is available.

The package is fully functional without the extension; ``seqwarp.jetcore``
falls back to a numpy implementation at import time.  Building from an sdist
without Cython simply skips the extension instead of failing.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "seqwarp._jetcore",
                ["src/seqwarp/_jetcore.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
