"""Exact enumeration and Monte Carlo estimation of order-6 semi-magic squares."""

__version__ = "0.1.0"
