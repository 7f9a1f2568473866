"""Build script for the optional compiled aggregation kernel.

The package is fully functional without the extension: ``relabel.kernels``
falls back to the pure-Python lane when the compiled module is absent.
Building it only makes large renovation runs faster.

    python setup.py build_ext --inplace
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "relabel.kernels._support",
        ["src/relabel/kernels/_support.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
