# squeezer/models/__init__.py
"""
Models module: parameters, Gaussian states, physical setups and scenarios
"""
