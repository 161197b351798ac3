"""phishtriage test suite."""
