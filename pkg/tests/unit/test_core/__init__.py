"""
Core Tests Package
"""
