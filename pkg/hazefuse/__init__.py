"""
hazefuse - adaptive multi-sensor situational awareness for autonomous vessels in haze
"""

__version__ = "0.1.0"
