from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "rtosmc._speedups",
        ["src/rtosmc/_speedups.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
