# locus_pipeline/__init__.py
