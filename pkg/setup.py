"""Build script for the optional compiled step kernels.

The package is pure Python plus one optional Cython extension holding the
hot iteration loops. If Cython or a C compiler is missing the extension is
skipped and the numpy fallback is used at import time.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, otherwise install pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"saddlebench: skipping compiled kernels ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"saddlebench: skipping {ext.name} ({exc})")


ext_modules = []
cmdclass = {}
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "saddlebench._stepkernels",
                ["src/saddlebench/_stepkernels.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps the float ops identical to the
                # numpy fallback (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    cmdclass = {"build_ext": optional_build_ext}
except ImportError as exc:
    print(f"saddlebench: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules, cmdclass=cmdclass)
