"""Heavy hexagonal code toolkit: layout, noise, gauge canonicalisation, decoders and threshold estimation."""

__version__ = "0.1.0"
