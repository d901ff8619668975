"""Entity-level citation networks built from a document corpus, with
network metrics and ranking comparisons against curated interactions."""

__version__ = "0.1.0"
