"""
Physical constants (CODATA 2018, SI units)
"""
import math

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
HBAR = 1.054571817e-34  # J s, exact
BOLTZMANN = 1.380649e-23  # J/K, exact

TWO_PI = 2.0 * math.pi

# Fused-silica defaults for the levitated particle
SILICA_PERMITTIVITY = 2.1
SILICA_DENSITY = 2200.0  # kg/m^3
