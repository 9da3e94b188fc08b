"""Numerical laboratory for planar ensembles with a Jordan-curve outpost."""

__version__ = "0.1.0"
