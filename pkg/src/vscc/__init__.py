"""Variable selection for model-based clustering and classification."""
