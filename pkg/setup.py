#!/usr/bin/env python
# -*- coding: utf-8 -*-
from setuptools import setup, find_packages


def calculate_version():
    initpy = open('fastkcde/_version.py').read().split('\n')
    version = list(filter(lambda x: '__version__' in x, initpy))[0].split('\'')[1]
    return version


package_version = calculate_version()

setup(
    name='fastkcde',
    version=package_version,
    packages=find_packages(),
    license='GNU/LGPLv3',
    python_requires='>=3.10',
    entry_points={'console_scripts': ['fastkcde=fastkcde.cli:main', ]},
    description=('Fast kernel conditional density estimation with dual-tree bandwidth selection'),
    long_description='''
Kernel conditional density estimates f(y|x) whose bandwidths are chosen by maximizing the
cross-validated likelihood, evaluated naively or with deterministic and bootstrap-pruned
dual-tree recursions over a kd-tree.
''',
    zip_safe=True,
    install_requires=['numpy>=1.16.3',
                      'scipy>=1.3.1',
                      'scikit-learn>=1.2.0',
                      'tqdm>=4.36.1',
                      'pandas>=1.5.3',
                      'joblib>=1.1.1',
                      'numba>=0.57.0',
                     ],
    classifiers=[
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU Lesser General Public License v3 (LGPLv3)',
        'Programming Language :: Python :: 3.10',
        'Topic :: Scientific/Engineering :: Mathematics'
    ],
    keywords=['conditional density estimation', 'kernel density estimation', 'bandwidth selection',
              'dual-tree algorithms', 'kd-tree', 'nonparametric statistics'],
)
