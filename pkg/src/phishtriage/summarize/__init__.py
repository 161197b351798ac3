"""Extractive summarization under word-budget policies."""
