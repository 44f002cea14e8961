# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.
#
# gsflow documentation build configuration file.

import os
import sys

import django

BASE_DIR = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.abspath(os.path.join(BASE_DIR, "..", ".."))

sys.path.insert(0, ROOT)

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'gsflow.test.settings')
django.setup()


def write_autodoc_index():

    def find_autodoc_modules(module_name, sourcedir):
        """Return the dotted names of the modules under ``sourcedir``."""
        modlist = []
        package_dir = os.path.join(sourcedir, module_name)
        for root, dirs, files in os.walk(package_dir):
            dirs.sort()
            relative = os.path.relpath(root, sourcedir)
            for filename in sorted(files):
                if filename == 'tests.py' or not filename.endswith('.py'):
                    continue
                elements = relative.split(os.path.sep)
                base = os.path.splitext(filename)[0]
                if base != '__init__':
                    elements.append(base)
                modlist.append('.'.join(elements))
        return modlist

    rstdir = os.path.join(BASE_DIR, 'contributor', 'api')
    # command modules have dashes in their names
    excluded = ('gsflow.management.commands.',)
    os.makedirs(rstdir, exist_ok=True)

    with open(os.path.join(rstdir, 'autoindex.rst'), 'w') as index:
        index.write("=================\n"
                    "Source Code Index\n"
                    "=================\n\n"
                    ".. toctree::\n"
                    "   :maxdepth: 1\n\n")
        for module in find_autodoc_modules('gsflow', ROOT):
            if module.startswith(excluded):
                continue
            index.write("   %s\n" % module)
            header = "The :mod:`%s` Module" % module
            with open(os.path.join(rstdir, '%s.rst' % module), 'w') as out:
                out.write("%s\n%s\n%s\n" % ("=" * len(header), header,
                                            "=" * len(header)))
                out.write(".. automodule:: %s\n"
                          "  :members:\n"
                          "  :undoc-members:\n"
                          "  :show-inheritance:\n"
                          "  :noindex:\n" % module)


write_autodoc_index()

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.todo',
              'sphinx.ext.coverage',
              'sphinx.ext.viewcode',
              ]

source_suffix = '.rst'
master_doc = 'index'

project = u'gsflow'
copyright = u'2026, gsflow developers'

release = ''
version = ''

exclude_patterns = []
add_module_names = False
pygments_style = 'sphinx'

html_theme = 'alabaster'
htmlhelp_basename = 'gsflowdoc'

man_pages = [
    ('index', u'gsflow', u'gsflow Documentation', [u'gsflow developers'], 1)
]
