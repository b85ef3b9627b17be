# -*- coding: utf-8 -*-
#
# Sphinx configuration for the lccr-toolkit documentation.
#
# Project name, author and description come from setup.cfg and the version
# from lccr/version.py, so neither needs to be kept in sync here.

import configparser
import os
import sys

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

setupcfg = configparser.ConfigParser()
setupcfg.read(os.path.join(project_root, 'setup.cfg'))
metadata = setupcfg['metadata']

meta = {}
version_file = os.path.join(project_root, 'lccr', 'version.py')
with open(version_file) as fileobj:
    exec(compile(fileobj.read(), version_file, 'exec'), {}, meta)

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.viewcode']
autodoc_member_order = 'bysource'

master_doc = 'index'
source_suffix = '.rst'
exclude_patterns = ['_build', 'build']

project = metadata['name']
author = metadata['author']
copyright = u'2024 - 2026, %s' % author
version = release = meta['version']

pygments_style = 'sphinx'
html_theme = 'classic'
htmlhelp_basename = 'lccrdoc'

man_pages = [
    ('usage', 'lccr', metadata['description'], [author], 1),
]
