# service/__init__.py
