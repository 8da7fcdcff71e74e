#!/usr/bin/python3
# -*- coding: utf-8 -*-

import io
import os

from setuptools import find_packages, setup

NAME = 'plane_navier_stokes'
DESCRIPTION = 'Constructive fixed-point solver for stationary Navier-Stokes flows on the plane.'
URL = ''
EMAIL = ''
AUTHOR = ''
REQUIRES_PYTHON = '>=3.8.0'
VERSION = '0.1.0'
REQUIRED = [
    'numpy>=1.20',
    'scipy>=1.7',
    'toml~=0.10.0',
    'PyYAML>=5.4'
]
REQUIRED_SETUP = [
    'pytest-runner>=5.2',
    'pytest-pylint>=0.18'
]
REQUIRED_TESTS = [
    'pytest>=6.2',
    'pylint>=2.8'
]

here = os.path.abspath(os.path.dirname(__file__))

# Import the README and use it as the long-description.
try:
    with io.open(os.path.join(here, 'README.md'), encoding='utf-8') as f:
        long_description = '\n' + f.read()
except FileNotFoundError:
    long_description = DESCRIPTION

about = {}
if not VERSION:
    with open(os.path.join(here, NAME, '__version__.py')) as f:
        exec(f.read(), about)
else:
    about['__version__'] = VERSION

setup(
    name=NAME,
    version=about['__version__'],
    description=DESCRIPTION,
    long_description=long_description,
    author=AUTHOR,
    author_email=EMAIL,
    python_requires=REQUIRES_PYTHON,
    url=URL,
    packages=find_packages(exclude=['tests']),
    install_requires=REQUIRED,
    setup_requires=REQUIRED_SETUP,
    tests_require=REQUIRED_TESTS,
    include_package_data=True
)
