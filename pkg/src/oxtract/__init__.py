"""oxtract: a declarative web-extraction language interpreter plus a
test-collection enrichment pipeline built on its harvested records."""

__version__ = "0.1.0"
