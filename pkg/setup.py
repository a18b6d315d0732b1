"""Build script.

The compiled kernels are optional: if Cython or a C toolchain is missing the
package installs pure-Python and selects the numpy fallback at import time.
Set CASCADE_PROBE_PURE=1 to skip the extension build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CASCADE_PROBE_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext = Extension(
            "cascade_probe._kernels_cy",
            ["src/cascade_probe/_kernels_cy.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
    except Exception:
        ext_modules = []

setup(ext_modules=ext_modules)
