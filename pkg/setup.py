from setuptools import setup, find_packages

setup(
    name="carousel_recommender",
    version="1.0.0",
    packages=find_packages(exclude=["examples", "examples.*"]),
    install_requires=[
        'pydantic>=2.5.0',
        'numpy>=1.24.0',
        'pandas>=2.0.0',
        'scipy>=1.10.0',
        'tqdm>=4.65.0',
    ],
    extras_require={
        'test': ['pytest>=7.4.0'],
    },
    entry_points={
        'console_scripts': [
            'carousel=carousel_recommender.src.main:main',
        ],
    },
    python_requires='>=3.9',
    description="Multi-carousel book recommendations with diversity, serendipity and novelty strategies",
    long_description=open('README.md').read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
