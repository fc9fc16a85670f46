from setuptools import setup, find_packages

setup(
    name="qsearch",
    version="0.1.0",
    packages=['qsearch'],
    package_dir={'qsearch': 'qsearch'},
    install_requires=[
        "numpy",
        "pandas",
        "pydantic",
        "python-dotenv",
        "PyYAML",
    ],
    extras_require={
        "test": ["pytest", "hypothesis"],
    },
    entry_points={
        "console_scripts": [
            "qsearch-run=qsearch.qsearch_run:main",
        ],
    },
    package_data={
        "qsearch": ["claims.yaml"],
    },
    include_package_data=True,
)
