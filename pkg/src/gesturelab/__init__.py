"""Gesture and color-marker perception engine with an IoT lab control plane."""

__version__ = "0.1.0"
