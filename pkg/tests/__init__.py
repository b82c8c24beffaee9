"""
Test Package
Unit, integration (CLI end-to-end) and simulation (synthetic training) tests
"""
