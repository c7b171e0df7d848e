"""
Test suite for the design constructions.
"""
