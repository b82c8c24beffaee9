"""
Service Tests Package
"""
