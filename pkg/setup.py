from setuptools import find_packages, setup

setup(
    name='advcontracts',
    version='0.1.0',
    license='BSD 3-clause',
    description='Contract design for data marketplaces with adversarial buyers',
    install_requires=open('requirements.txt').readlines(),
    tests_require=open('test-requirements.txt').readlines(),
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    packages=find_packages(),
    python_requires='>=3.8',
    include_package_data=True,
    package_data={'advcontracts.demos': ['*.json', '*.csv']},
    entry_points={'console_scripts': ['advcontracts=advcontracts.cli:main']},
)
