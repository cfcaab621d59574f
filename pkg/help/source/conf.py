# -*- coding: utf-8 -*-
#
# compound_feedback documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import sys, os

# The package lives two levels above this directory
current_dir = os.path.dirname(os.path.abspath(__file__))
project_root = os.path.abspath(os.path.join(current_dir, '../../'))
sys.path.insert(0, project_root)

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.todo',
              'sphinx.ext.imgmath',
              'sphinx.ext.viewcode',
              'sphinx.ext.autodoc',
              'sphinx.ext.napoleon',
              'sphinx_rtd_theme']

autodoc_mock_imports = [
    'numpy',
    'scipy',
]

source_suffix = '.rst'
master_doc = 'index'

project = u'compound_feedback'
copyright = u'2026, compound_feedback developers'

# The short X.Y version.
version = '0.3'
# The full version, including alpha/beta/rc tags.
release = '0.3'

exclude_patterns = []
pygments_style = 'sphinx'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'CompoundFeedbackdoc'

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
  ('index', 'CompoundFeedback.tex', u'compound_feedback Documentation',
   u'compound_feedback developers', 'manual'),
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'compound_feedback', u'compound_feedback Documentation',
     [u'compound_feedback developers'], 1)
]
