"""Exact-arithmetic toolkit for phi/Gamma-module computations at finite precision.

Subpackages cover: linear algebra over Z/p^s, truncated Laurent models of the
characteristic-p norm field and its perfection levels, two mixed-characteristic
lift models (arithmetic Laurent lifts and genuine Witt coordinates),
Artin-Schreier and (phi-1)-solvers, etale phi/Gamma-modules with their
cohomology complexes, normalized trace operators with axiom certificates, and
generic homological machinery (cones, spectral sequences, towers).
"""

__version__ = "0.1.0"
