"""Maritime UAV coverage planning over hybrid satellite-UAV-terrestrial networks."""

__version__ = "0.1.0"
