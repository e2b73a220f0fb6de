import os

import numpy as np
from setuptools import Extension, setup

# CHECKERBOARD_NO_EXT=1 installs the pure-Python fallback only.
if os.environ.get("CHECKERBOARD_NO_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "checkerboard._kernels",
                ["src/checkerboard/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
