"""mflab: exact computer algebra for the modular foliation on P(2,3,2,3,1)."""

__version__ = "0.1.0"
