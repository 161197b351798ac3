"""Persuasion-trigger classification, per-email profiles and baselines."""
