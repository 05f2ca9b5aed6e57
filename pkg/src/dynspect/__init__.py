"""Stable spectral embeddings for dynamic networks."""
