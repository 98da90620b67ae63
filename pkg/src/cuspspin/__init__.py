"""Exact combinatorics of a cusped right-angled hyperbolic 4-manifold and the
mod 2 self-intersection of a surface inside it."""

__version__ = "0.1.0"
