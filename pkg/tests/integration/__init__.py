"""Integration tests for phishtriage."""
