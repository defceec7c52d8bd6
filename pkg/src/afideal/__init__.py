"""Exact ideal-space computations for the Farey AF algebra and its Effros-Shen quotients."""

__version__ = "0.1.0"
