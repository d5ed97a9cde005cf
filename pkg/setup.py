#!/usr/bin/env python

"""The setup script."""
from setuptools import find_packages
from setuptools import setup

with open('README.rst', encoding='utf-8') as readme_file:
    readme = readme_file.read()

with open("requirements.txt") as f:
    requirements = f.read().splitlines()

setup_requirements = ['pytest-runner', ]

test_requirements = ['pytest>=6', 'hypothesis>=6', ]

setup(
    author="loclab developers",
    python_requires='>=3.8',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    description="Numerical laboratory for no-go theorems on relativistic particle localization.",
    entry_points={
        'console_scripts': [
            'loclab=loclab.lab_calculator:main',
        ],
    },
    install_requires=requirements,
    long_description=readme,
    include_package_data=True,
    keywords='loclab',
    name='loclab',
    packages=find_packages(include=['loclab', 'loclab.*']),
    setup_requires=setup_requirements,
    test_suite='tests',
    tests_require=test_requirements,
    version='0.1.0',
    zip_safe=False,
)
