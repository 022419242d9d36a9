import io
import os
import re
import sys
from setuptools import setup, find_packages

PATH_BASE = os.path.dirname(__file__)


def read_file(fpath):
    """Reads a file within package directories."""
    with io.open(os.path.join(PATH_BASE, fpath)) as f:
        return f.read()


def get_version():
    """Returns version number, without module import (which can lead to ImportError
    if some dependencies are unavailable before install."""
    contents = read_file(os.path.join('pysbfd', '__init__.py'))
    version = re.search(r'VERSION = \(([^)]+)\)', contents)
    version = version.group(1).replace(', ', '.').strip()
    return version


setup(
    name='pysbfd',
    version=get_version(),

    description='Link-level simulator of sub-band full-duplex cell-free joint communication and sensing',
    long_description=read_file('README.rst'),
    license='BSD 3-Clause License',

    packages=find_packages(exclude=['tests']),
    include_package_data=True,
    zip_safe=False,

    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.6',
        'pandas>=1.5',
    ],
    setup_requires=[] + (['pytest-runner'] if 'test' in sys.argv else []),
    tests_require=[
        'pytest',
        'pytest-datafixtures>=1.0.0',
        'click',
    ],
    extras_require={
        'cli': ['click'],
    },

    entry_points={
        'console_scripts': ['pysbfd = pysbfd.cli:main'],
    },

    test_suite='tests',

    classifiers=[
        # As in https://pypi.python.org/pypi?:action=list_classifiers
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'License :: OSI Approved :: BSD License',
        'Topic :: Scientific/Engineering',
    ],
)
