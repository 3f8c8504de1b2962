from setuptools import setup, find_namespace_packages

setup(
    name="vlex-multipliers",
    version="0.1.0",
    description="Numerical toolkit for variable exponent Lebesgue spaces and Fourier multipliers on them.",
    url="",
    author="vlex-multipliers contributors",
    author_email="",
    license="",
    packages=find_namespace_packages(
        include=["vlex_multipliers", "vlex_multipliers.*"],
        exclude=["build*", "dist*", "logs*", "reports*"]
    ),
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "sympy>=1.12",
        "gymnasium>=0.29",
        "bidict>=0.22",
    ],
    extras_require={
        "test": ["pytest>=7.4", "hypothesis>=6.80"],
        "docs": ["sphinx>=7.0", "sphinx_rtd_theme>=1.3"],
    },
    entry_points={
        "console_scripts": ["vlex=vlex_multipliers.cli.main:main"],
    },
    classifiers=[""]
)
