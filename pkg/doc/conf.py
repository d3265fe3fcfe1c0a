#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# exforge documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys
package_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, package_dir)

from exforge import __version__

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'exforge'
copyright = '2026, exforge developers'
author = 'exforge developers'

# The short X.Y version.
version = '.'.join(__version__.split('.')[:2])
# The full version, including alpha/beta/rc tags.
release = __version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_title = 'exforge'
htmlhelp_basename = 'exforgedoc'

# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
    (master_doc, 'exforge.tex', 'exforge Documentation',
     author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'exforge', 'exforge Documentation',
     [author], 1)
]

intersphinx_mapping = {'python':('https://docs.python.org/3/', None),
                       'numpy': ('https://numpy.org/doc/stable/', None),
                       'pandas': ('https://pandas.pydata.org/pandas-docs/stable/', None),
                       'scipy': ('https://docs.scipy.org/doc/scipy/reference/', None),
                       'sklearn': ('https://scikit-learn.org/stable/', None)}

# Alabaster Sidebar #
html_sidebars = {
    '**': [
        'about.html',
        'navigation.html',
        'relations.html',
        'searchbox.html',
    ]
}
