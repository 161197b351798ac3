"""Unit tests for phishtriage."""
