"""
Schema Tests Package
"""
