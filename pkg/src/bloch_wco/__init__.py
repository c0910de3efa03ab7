"""
Norm and essential-norm estimates for weighted composition operators
uC_phi on the Bloch space of the unit disk.
"""

__version__ = "0.1.0"
