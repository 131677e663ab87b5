"""
kgqc - Graph-structured query construction over knowledge graphs

Learns translation embeddings from generalized local knowledge graphs and
uses them to assemble, rank, and execute queries for natural-language questions.
"""

__version__ = "0.1.0"
