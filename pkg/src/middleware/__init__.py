"""
Middleware Module
Error boundary between the command handlers and the process exit code
"""
