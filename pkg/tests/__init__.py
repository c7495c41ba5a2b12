"""
Test suite for the Renyi dimension toolkit.
"""
