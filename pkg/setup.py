from setuptools import setup, find_packages

with open('README.md', 'r') as fh:
    long_description = fh.read()

setup(
    name='charflow',
    version='0.1.0',
    author='charflow developers',
    description='Characteristic shock tracking for scalar conservation laws',
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests']),
    python_requires='>=3.8',
    entry_points=dict(
        console_scripts=[
            'charflow=charflow.cli:cli',
            'charflow-run=charflow.cmds:RUN_CMD',
            'charflow-converge=charflow.cmds:CONVERGE_CMD',
        ]
    ),
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'Click',
    ],
    extras_require=dict(
        test=['pytest'],
    ),
)
