from setuptools import setup, find_packages

with open('README.md', 'r') as f:
    readme = f.read()
version = '0.0.1'
setup(
    name='qcontact',
    packages=find_packages(exclude=["asset", "examples", "tests"]),
    version=version,
    license='MIT',
    description='Collision-model toolkit for thermal contact between quantum systems',
    keywords=['quantum', 'thermodynamics', 'collision-model', 'open-quantum-systems'],
    long_description=readme,
    long_description_content_type="text/markdown",
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Physics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
    ],
    include_package_data=True,
    test_suite='tests',
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.4',
        'matplotlib>=3.3.1',
        'toml',
        'tqdm'
    ],
    python_requires='>=3.6',
    entry_points={
        'console_scripts': [
            'qcontact = qcontact_cl.run:main'
        ],
    }
)
