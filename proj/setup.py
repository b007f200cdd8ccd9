"""Build the C++ extension through CMake so the pip install and the plain
CMake build share one source of truth."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        source_dir = Path(__file__).resolve().parent
        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        ext_dir = ext_path.parent
        ext_dir.mkdir(parents=True, exist_ok=True)
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        cfg = os.environ.get("PARAFLOW_BUILD_TYPE", "Release")
        cmake_args = [
            f"-DCMAKE_BUILD_TYPE={cfg}",
            f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={ext_dir}",
            f"-DPython3_EXECUTABLE={sys.executable}",
            "-DPARAFLOW_BUILD_TESTS=OFF",
        ]
        subprocess.run(
            ["cmake", str(source_dir), *cmake_args], cwd=build_dir, check=True
        )
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_paraflow", "-j"],
            cwd=build_dir,
            check=True,
        )


setup(
    ext_modules=[CMakeExtension("paraflow._paraflow")],
    cmdclass={"build_ext": CMakeBuild},
)
