"""Cross-lingual citation analysis for English scholarly corpora."""

__version__ = "0.1.0"
