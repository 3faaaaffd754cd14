"""Exact dynamics services for the transitivity app."""
