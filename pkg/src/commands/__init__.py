"""
Command handlers of the mtranse CLI

Each module exposes `register(subparsers)`, which adds its parser and
binds the handler through `set_defaults(handler=...)`.
"""
