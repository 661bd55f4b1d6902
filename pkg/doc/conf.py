# -*- coding: utf-8 -*-
#
# scorenet documentation build configuration file.

import os
import sys
from datetime import datetime
from pathlib import Path

root = Path(__file__).absolute().parent.parent
sys.path.insert(0, str(root))

from scorenet._version import __version__  # noqa: E402

on_rtd = os.environ.get("READTHEDOCS", None) == "True"

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
]

autodoc_default_options = {
    'members': True,
    'undoc-members': True,
    'show-inheritance': True,
}

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'scorenet'
copyright = u'{0}, scorenet Development Team'.format(datetime.now().year)
version = '.'.join(__version__.split('.')[0:1])
release = __version__

exclude_patterns: list = ['build']
pygments_style = 'sphinx'
html_theme = 'sphinx_rtd_theme'
html_short_title = "scorenet {0}".format(release)
html_static_path: list = []
htmlhelp_basename = 'scorenetdoc'

intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'networkx': ('https://networkx.org/documentation/stable/', None),
}
