# repvar_pipeline/__init__.py
