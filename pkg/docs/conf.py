# Sphinx configuration for the amcbackdoor documentation.

import os
import re
import sys

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, ROOT)


def _read_version():
    # importing the package would start its logging
    path = os.path.join(ROOT, 'amcbackdoor', '__init__.py')
    with open(path) as f:
        return re.search(r"__version__ = '([^']+)'", f.read()).group(1)


project = 'amcbackdoor'
copyright = '2026, amcbackdoor developers'
author = 'amcbackdoor developers'
release = _read_version()
version = '.'.join(release.split('.')[:2])

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx-jsonschema',
    'sphinx_rtd_theme',
    'm2r2',
]

source_suffix = ['.rst', '.md']
exclude_patterns = ['build', '.DS_Store', '**.ipynb_checkpoints']

# docstrings use ``Args:`` blocks
napoleon_google_docstring = True
napoleon_numpy_docstring = False
autodoc_member_order = 'bysource'
autodoc_typehints = 'description'
autodoc_default_options = {'members': True, 'undoc-members': False}

jsonschema_options = {'lift_description': True, 'auto_reference': True}

html_theme = 'sphinx_rtd_theme'
html_theme_options = {'collapse_navigation': False, 'navigation_depth': 3}
html_show_copyright = False
