# squeezer/utils/__init__.py
"""
Utilities module: error types and config validation helpers
"""
