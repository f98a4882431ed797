"""Self-hostable evaluation-as-a-service judge for optimization problems."""

__version__ = "0.1.0"
