"""
Tests for kgqc.
"""
