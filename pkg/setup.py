"""Build script: compiles the optional extension holding the hot kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time), so a failed compile only costs speed, not functionality.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "avmc._kernels",
                ["src/avmc/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # noqa: BLE001 - extension is optional
    print(f"avmc: skipping compiled kernels ({exc}); using pure-python fallback",
          file=sys.stderr)

setup(ext_modules=ext_modules)
