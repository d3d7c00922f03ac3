"""Exact construction of OZ vertex algebras from commutative algebras with invariant forms."""

__version__ = "0.1.0"
