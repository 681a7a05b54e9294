"""Build script: compiles the optional Cython speedup extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here degrades to a pure-Python install rather
than aborting.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "stormweave._ckernels",
                sources=["src/stormweave/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"stormweave: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
