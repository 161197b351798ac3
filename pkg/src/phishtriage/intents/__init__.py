"""Intent span tagging."""
