"""Email parsing, body extraction, sentence segmentation and corpus loading."""
