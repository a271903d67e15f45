"""Build script for the optional compiled rollout kernel.

If Cython or a C compiler is unavailable the package still installs and
runs on the pure-Python rollout.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("MOSWARM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "moswarm._rollout",
                    ["src/moswarm/_rollout.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # keep IEEE semantics so results match the Python path exactly
                    extra_compile_args=[
                        "-O2", "-ffp-contract=off", "-fno-fast-math",
                        # gcc would otherwise fuse sin+cos into sincos, which rounds differently
                        "-fno-builtin-sin", "-fno-builtin-cos",
                    ],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
