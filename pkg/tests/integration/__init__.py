"""Integration tests for the mtranse CLI"""
