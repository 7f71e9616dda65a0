"""Skybridge: LEO in-flight coverage and in-cabin propagation simulator"""

__version__ = "0.1.0"
