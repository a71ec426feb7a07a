from setuptools import setup, find_packages

MAJOR = 0
MINOR = 1
MICRO = 0
VERSION = '%d.%d.%d' % (MAJOR, MINOR, MICRO)


def readme():
    with open('README.md') as f:
        content = f.read()
    return content[:content.find('## Tests')]


setup(
    name='entroscope',
    version=VERSION,
    license='Apache License, Version 2.0',
    description='Locating quantum phase transitions with sublattice reduced entropy',
    long_description=readme(),
    long_description_content_type='text/markdown',
    author='The entroscope developers',
    packages=find_packages(exclude=['tests']),
    python_requires='>=3.7',
    install_requires=[
        'scipy >= 1.6.0',
        'numpy >= 1.17',
    ],
    extras_require={
        'dev': [
            'pytest >= 6.2.4',
        ],
    },
    entry_points={
        'console_scripts': [
            'entroscope = entroscope.cli:main',
        ],
    },
)
