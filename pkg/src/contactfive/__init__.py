"""Numerical toolkit for anti-compatible almost complex structures on
contact R^5: form algebra and semi-calibration checks, J-invariant
Legendrian disks via a fixed-point elliptic solver, and polar/parallel
foliations with signed intersections."""

__version__ = "0.1.0"
