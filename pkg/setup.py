"""Build script for the optional compiled coordinate-descent kernel.

Installation succeeds without Cython or a C compiler; the package then
selects the pure-Python kernel at import time.  To build the accelerator
in place:

    python setup.py build_ext --inplace
"""
from setuptools import setup


def extensions():
    try:
        from Cython.Build import cythonize
        from setuptools.extension import Extension
    except ImportError:
        return []
    ext = Extension(
        "pauc_push._kernels._cd_fast",
        sources=["src/pauc_push/_kernels/_cd_fast.pyx"],
        optional=True,
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions())
