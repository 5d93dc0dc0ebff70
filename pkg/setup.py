import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the error-free transforms (two-product, Neumaier) exact.
compile_args = ["-O3", "-ffp-contract=off", "-fno-math-errno", "-fno-trapping-math", "-fopenmp"]
if os.environ.get("BIRKHOFF_NATIVE", "1") == "1":
    compile_args += ["-march=native", "-mprefer-vector-width=256"]

extensions = [
    Extension(
        "birkhoff_limit._core",
        ["src/birkhoff_limit/_core.pyx"],
        include_dirs=[np.get_include(), "src/birkhoff_limit"],
        depends=["src/birkhoff_limit/_line.h"],
        extra_compile_args=compile_args,
        extra_link_args=["-fopenmp"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
