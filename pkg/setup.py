from setuptools import setup, find_packages

with open('requirements.txt', 'r') as req_fp:
    required_packages = req_fp.readlines()

# Use README for long description
with open('README.md', 'r') as readme_fp:
    long_description = readme_fp.read()


setup(
    name="pyfairmod",
    version="0.1.0",
    description="Fair distributed auction assignment of scLTL ride requests to mobility-on-demand vehicles, with a discrete-time simulator.",
    license="BSD 3-Clause",
    keywords="mobility-on-demand auction scltl automata fairness simulation",
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages = find_packages(exclude=['tests', 'docs']),
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'pyfairmod = pyfairmod:main',
        ],
    },
    install_requires=required_packages,
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',

        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],

)
