#!/usr/bin/env python

from setuptools import setup, find_packages

setup(name="modecoupler",
      version="0.1.0",
      description="Coupled resonators sharing one transmission line: spectra, bound states, fits",
      packages=find_packages(exclude=["tests"]),
      python_requires=">=3.8",
      install_requires=["numpy", "scipy>=1.7", "ruamel.yaml", "click", "argcomplete"],
      extras_require={"test": ["pytest>=7"]},
      entry_points={"console_scripts": ["modecoupler = modecoupler.modecoupler:main"]},
)
