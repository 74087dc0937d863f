import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "meshlift._kernels._raster_cy",
                ["src/meshlift/_kernels/_raster_cy.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps per-expression IEEE semantics so the
                # compiled kernels match the numpy fallback bit for bit.
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
