# group_pipeline/__init__.py
