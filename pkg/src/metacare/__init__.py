"""Prediction with expert advice: D.HEDGE, FTRL-CARE and META-CARE with a regret harness."""

__version__ = "0.1.0"
