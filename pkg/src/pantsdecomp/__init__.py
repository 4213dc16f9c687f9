"""Pants decompositions of closed hyperbolic surfaces."""
