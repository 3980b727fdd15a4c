"""Community organizations mined around concerned attributes in attributed graphs."""

__version__ = "0.1.0"
