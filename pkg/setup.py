import os
import warnings

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    warnings.warn("Cython not found; building without the compiled kernels.")
    cythonize = None


extensions = []
if cythonize is not None and not os.environ.get("NETINF_NO_EXT"):
    extensions = cythonize(
        [
            Extension(
                "netinf._kernels._lars_c",
                sources=["src/netinf/_kernels/_lars_c.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
