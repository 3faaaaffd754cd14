"""Configure Django before pytest collects the transitivity test modules."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'ndslab.settings')
django.setup()
