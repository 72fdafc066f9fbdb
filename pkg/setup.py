"""Build script: compiles the optional jet-convolution extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any build failure here degrades gracefully to a
pure-Python install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "finsler._jetcore",
        ["src/finsler/_jetcore.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)
except Exception as exc:  # pragma: no cover - build-environment dependent
    sys.stderr.write(f"finsler: skipping compiled kernel ({exc!r}); "
                     "the NumPy fallback will be used\n")

setup(ext_modules=ext_modules)
