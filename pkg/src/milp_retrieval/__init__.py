"""Generator retrieval for mixed-integer linear programs."""

__version__ = "0.1.0"
