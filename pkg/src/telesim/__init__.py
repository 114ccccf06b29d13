"""Desk-scale bilateral teleoperation simulator for a wheeled humanoid."""

__version__ = "0.1.0"
