"""MOOC Behavior - user behavior inference from event logs with Bayesian IRL."""

__version__ = "0.3.0"
