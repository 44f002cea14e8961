# Bootstrap Django the same way manage.py / tox do, so pytest can collect
# the Django-style tests.py modules.
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'gsflow.test.settings')
django.setup()
