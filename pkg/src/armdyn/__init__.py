"""Inverse dynamics for serial arms and air-bearing reaction torques."""
__version__ = "0.1.0"
