from setuptools import setup, find_packages

setup(
    name="pdm-slater",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "pydantic>=2.1.1",
        "numpy>=1.22",
        "scipy>=1.8"
    ],
    entry_points={
        "console_scripts": ["pdm-slater=pdm_slater.cli:main"]
    }
)
