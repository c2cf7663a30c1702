import setuptools

d = {}
exec(open("geomdiff/version.py").read(), None, d)
version = d['version']
pkg_name = "geomdiff"
long_description = open("README.md").read()

setuptools.setup(
    name=pkg_name,
    version=version,
    description="Diffusion models over function values with Gaussian-process limits and E(n) symmetries",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "examples", "examples.*"]),
    package_data={},
    install_requires=[
        'numpy',
        'scipy',
        'tqdm',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': ['geomdiff=geomdiff.cli:main'],
    },
    classifiers=(
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
    )
)
