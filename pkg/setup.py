"""Setup script for exforge"""

from setuptools import setup
from os import path
from exforge import __version__

with open(path.join(path.dirname(__file__), "requirements.txt"), "r") as f:
    requirements = f.read().splitlines()

with open(path.join(path.dirname(__file__), "README.rst"), "r") as f:
    long_description = f.read()

setup(
    name = 'exforge',
    packages=["exforge", ],
    version = __version__,
    description = 'Generates usage examples for command line tools from telemetry and mined documentation.',
    long_description = long_description,
    keywords = ['command line', 'documentation', 'telemetry', 'examples'],
    classifiers=[
        "Intended Audience :: Developers",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Documentation",
        "Topic :: Software Development :: Documentation",
        "Topic :: Scientific/Engineering :: Information Analysis",
    ],
    python_requires = '>=3.8',
    install_requires = requirements,
    extras_require = {'test': ['pytest>=6.0']},
    entry_points = {'console_scripts': ['exforge = exforge.cli:main']},
    package_data = {'exforge': ['data/*.csv', 'data/fixtures/*.json',
                                'data/fixtures/*.jsonl',
                                'data/fixtures/*.csv',
                                'data/fixtures/*.yaml',
                                'data/fixtures/corpus/*',
                                'data/fixtures/docs/*']}
)
