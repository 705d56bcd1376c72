"""
SBC Concentration - Simulation and numerical verification of stochastic bounded confidence dynamics
"""

__version__ = "0.1.0"
