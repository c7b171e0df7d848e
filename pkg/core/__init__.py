"""
Core combinatorial objects: designs, resolutions, Baranyai parallelisms and file formats.
"""
