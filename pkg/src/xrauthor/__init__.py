"""xrauthor: turn a teacher's plain-language request into a safety-reviewed,
tutor-enriched XR scene bundle via a four-stage agent pipeline."""

__version__ = "0.1.0"
