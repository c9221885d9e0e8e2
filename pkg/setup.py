from os import path
from setuptools import setup
import sys


# NOTE: This file must keep erroring out cleanly on old interpreters, so that
# people with outdated setuptools and/or pip get a readable message.
if sys.version_info < (3, 8):
    error = """
pcsample does not support Python {0}.
Python 3.8 and above is required. Check your Python version like so:

python3 --version

This may be due to an out-of-date pip. Make sure you have pip >= 9.0.1.
Upgrade pip like so:

pip install --upgrade pip
""".format(sys.version_info)
    sys.exit(error)

here = path.abspath(path.dirname(__file__))

with open(path.join(here, 'README.md'), encoding='utf-8') as readme_file:
    readme = readme_file.read()

with open(path.join(here, 'requirements.txt')) as requirements_file:
    # Parse requirements.txt, ignoring any commented-out lines.
    requirements = [line for line in requirements_file.read().splitlines()
                    if not line.startswith('#')]

version = {}
with open(path.join(here, 'pcsample', '_version.py')) as version_file:
    exec(version_file.read(), version)

subpackages = ['core', 'order', 'synth', 'sampler', 'metrics', 'formats', 'bench', 'cli']

setup(
    name='pcsample',
    version=version['__version__'],
    description='Farthest point sampling for ordered point clouds',
    long_description=readme,
    long_description_content_type='text/markdown',
    packages=['pcsample'] + [f'pcsample.{name}' for name in subpackages] + [
        f'pcsample.{name}.tests' for name in subpackages],
    entry_points={
        'console_scripts': [
            'pcsample = pcsample.cli:main',
            ],
        },
    include_package_data=True,
    python_requires='>=3.8',
    install_requires=requirements,
    license="BSD (3-clause)",
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Natural Language :: English',
        'Programming Language :: Python :: 3.8',
    ],
)
