# squeezer/__init__.py
"""
Mechanical squeezing from unstable optomechanical dynamics: simulator and design tool
"""

__version__ = "1.0.0"
