"""Chernoff product-formula approximations of operator semigroups."""

__version__ = "0.1.0"
