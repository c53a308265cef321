from setuptools import setup, find_packages

setup(
    name="vmonotone-moments",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    py_modules=[
        "partitions", "labelings", "moments", "fock", "polyengine", "mgf",
        "verification", "reporting", "utils", "main",
    ],
    install_requires=[
        "python-dotenv>=1.0.0",
        "rich>=13.7.0",
        "psutil>=5.9.8",
        "pydantic>=2.5.0",
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "sympy>=1.12",
        "mpmath>=1.3.0",
    ],
    extras_require={
        'dev': [
            'pytest>=7.4.3',
            'pytest-cov>=4.1.0',
            'pytest-mock>=3.12.0',
            'hypothesis>=6.90.0',
            'jsonschema>=4.20.0',
        ]
    },
    entry_points={
        'console_scripts': ['vmonotone=main:cli'],
    },
)
