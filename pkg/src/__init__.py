"""CritState - Critical-state exploration experiments on grid mazes."""

__version__ = "0.1.0"
