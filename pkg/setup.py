"""Build the optional Cython kernels; the package falls back to numpy without them."""
import os

import numpy as np
from setuptools import Extension, setup

PYX = os.path.join("src", "pantsdecomp", "_ckernels.pyx")

ext_modules = []
if os.path.exists(PYX) and not os.environ.get("PANTSDECOMP_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("pantsdecomp._ckernels", [PYX], include_dirs=[np.get_include()], extra_compile_args=["-O3"])],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False, "cdivision": True},
    )

setup(ext_modules=ext_modules)
