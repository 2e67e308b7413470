"""Evaluation toolkit for image restoration: distortion, perception, and
semantic-alignment metrics over a seeded parametric degradation pipeline."""

__version__ = "0.1.0"
