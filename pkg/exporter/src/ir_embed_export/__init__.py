"""Bridges pretrained image encoders into the evaluation toolkit's embedding
manifest format (JSON, one L2-normalized vector per image id)."""

__version__ = "0.1.0"
