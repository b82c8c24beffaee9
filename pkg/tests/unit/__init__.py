"""
Unit Tests
Fast, isolated tests of the services, core helpers and schemas
"""
