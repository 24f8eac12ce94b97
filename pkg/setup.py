from setuptools import find_packages, setup

setup(
    name="fcn-dementia",
    version="0.1.0",
    description="Dementia screening from spontaneous speech with a fully convolutional network",
    packages=find_packages(include=["src", "src.*"]),
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "soundfile>=0.12",
        "PyYAML>=6.0",
        "Pillow>=10.0",
    ],
    entry_points={"console_scripts": ["fcn-dementia=src.cli.commands:main"]},
)
