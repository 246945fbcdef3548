import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "revanneal._core",
                ["src/revanneal/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-march=native", "-fno-math-errno"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

# The extension is a performance core only; the package falls back to the
# pure NumPy kernels when it cannot be built.
for ext in ext_modules:
    ext.optional = True

setup(ext_modules=ext_modules)
