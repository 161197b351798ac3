"""Precision/recall/F1 harness for trigger and intent backends."""
