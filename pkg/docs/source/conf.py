# Configuration file for the Sphinx documentation builder.
#
# This file does only contain a selection of the most common options. For a
# full list see the documentation:
# http://www.sphinx-doc.org/en/master/config

# -- Project information -----------------------------------------------------

from advcontracts import __version__ as version

project = 'advcontracts'
copyright = '2026, advcontracts developers'
author = 'advcontracts developers'

# The full version, including alpha/beta/rc tags
release = version

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.intersphinx',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
language = None
exclude_patterns = []
pygments_style = None

# -- Options for HTML output -------------------------------------------------

html_theme = "pydata_sphinx_theme"
htmlhelp_basename = 'advcontractsdoc'
html_show_sphinx = False

# -- Options for manual page output ------------------------------------------

man_pages = [
    (master_doc, 'advcontracts', 'advcontracts Documentation',
     [author], 1)
]

autosummary_generate = ["api_reference.rst"]
