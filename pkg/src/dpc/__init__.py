"""Differential property classification: which of two process-parameter
sets yields the higher material property?"""

__version__ = "0.1.0"
