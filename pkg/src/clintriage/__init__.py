"""Uncertainty-aware symptom triage with retrieval-grounded treatment
suggestions and rule-based drug-safety post-processing."""

__version__ = "0.1.0"
