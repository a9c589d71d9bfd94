"""Neighborhood summaries for RDF datasets and summary-aware rewriting of BGP queries."""

__version__ = "0.1.0"
