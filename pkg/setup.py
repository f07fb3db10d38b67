"""Build script: compiles the optional distance-kernel extension.

The package is fully functional without the extension; symadit.kernels
falls back to a vectorized numpy implementation when the compiled module
is missing (see benchmarks/bench_kernels.py for the speed comparison).
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
                "symadit._kernels",
                ["src/symadit/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
