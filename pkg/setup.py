"""Build the optional compiled matcher kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs without it and ``minutiae_stego.matcher`` falls back to the
numpy implementation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "minutiae_stego._match_ext",
                ["src/minutiae_stego/_match_ext.pyx"],
                # keep float rounding identical to the numpy fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
