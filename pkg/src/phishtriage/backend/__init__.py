"""Newline-delimited JSON protocol client for external model backends."""
