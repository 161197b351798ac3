"""phishtriage - summaries, trigger profiles and intent highlights for phishing triage."""

__version__ = "0.1.0"
