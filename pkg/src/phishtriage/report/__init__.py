"""Report aggregation, density metrics and rendering."""
