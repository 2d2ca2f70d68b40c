from setuptools import setup, Extension
from Cython.Build import cythonize
import numpy as np

# no fast-math: the pure-Python fallback mirrors this arithmetic
extra_compile_args = ["-O3", "-ffp-contract=off"]
define_macros = [("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")]

ext_modules = cythonize(
    [
        Extension(
            "gathersim._kernels",
            ["src/gathersim/_kernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=extra_compile_args,
            define_macros=define_macros,
        )
    ],
    compiler_directives={"language_level": "3"},
)

setup(ext_modules=ext_modules)
