"""Build script: compiles the optional kernel extension when possible.

The package is fully functional without the extension (a numpy fallback is
selected at import), so compilation failures degrade to a warning instead
of aborting the install.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"skipping compiled kernels ({exc}); "
                          f"the pure-numpy lane will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name} ({exc}); "
                          f"the pure-numpy lane will be used")


try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("framewalk._kernels", ["src/framewalk/_kernels.pyx"],
                   extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"})
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
