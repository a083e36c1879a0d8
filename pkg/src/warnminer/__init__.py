"""Differential mining of actionable static-analysis warnings from Git history."""

__version__ = "0.1.0"
