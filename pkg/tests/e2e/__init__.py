"""End-to-end tests for phishtriage."""
