from setuptools import setup, find_packages
from amcbackdoor import __version__

setup(name='amcbackdoor',
      version=__version__,
      description='Attribution-guided backdoor attacks on OFDM automatic '
                  'modulation classifiers',
      classifiers=[
          "Intended Audience :: Science/Research",
          "Programming Language :: Python :: 3 :: Only",
          "License :: MIT License",
          "Topic :: Scientific/Engineering",
      ],
      license='MIT',
      packages=find_packages(),
      package_data={'amcbackdoor.configuration': ['*.json']},
      python_requires=">=3.9",
      install_requires=[
          "numpy>=1.21.0",
          "scipy>=1.9",
          "pandas>=1.5.0",
          "tqdm",
          "jsonschema",
      ],
      extras_require={
          "test": ["pytest", "hypothesis"],
      },
      entry_points={
          "console_scripts": [
              "amcbackdoor=amcbackdoor.harness.cli:main",
          ],
      },
      zip_safe=False)
