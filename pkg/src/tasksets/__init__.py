"""Task-set behavioural analysis of multi-agent gameplay trajectories."""

__version__ = "0.1.0"
