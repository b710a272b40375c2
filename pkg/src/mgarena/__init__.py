"""Unitary circuit games on matchgate circuits.

Four views of the same dynamics: covariance matrices, reduced staircase
circuits, majorana pairings and Bell pair configurations.
"""

__version__ = "0.1.0"
