"""fstirap-cavity - two-atom cavity/laser (fractional) STIRAP simulations."""

__version__ = "1.0.0"
