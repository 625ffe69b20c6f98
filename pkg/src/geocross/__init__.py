"""Joint time-location-word embeddings from geo-tagged short text records."""

__version__ = "0.1.0"
