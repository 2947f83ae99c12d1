"""Integrated satellite-terrestrial network simulator with learned downtilt/power control."""

__version__ = "0.1.0"
