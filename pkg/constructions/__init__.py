"""
Doubling constructions, the named families built on them, and resolutions
of the constructed designs.
"""
