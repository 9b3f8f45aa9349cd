# Note: you shouldn't need to run this script manually.  It is run implicitly by the pip3 install command.

import pathlib

from setuptools import setup

# The directory containing this file
HERE = pathlib.Path(__file__).parent

with open("README.md", "r") as fh:
    long_description = fh.read()

# This call to setup() does all the work
setup(
    name="g2flow",
    version="0.1.0",
    description="Simulator for the Hamiltonian flow of torsion-free G2-structures on left-invariant data",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="GPL-3.0-only",
    classifiers=[
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    packages=["g2flow"],
    include_package_data=True,
    install_requires=[
        "numpy>=1.21",
        "pypubsub>=4.0.3",
        "dotmap>=1.3.14",
        "tabulate>=0.8.9",
        "pyyaml",
    ],
    extras_require={"test": ["pytest", "pytest-cov", "hypothesis"]},
    python_requires=">=3.8",
    entry_points={
        "console_scripts": [
            "g2flow=g2flow.__main__:main",
        ]
    },
)
