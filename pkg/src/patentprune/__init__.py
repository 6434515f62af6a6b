"""Patent-portfolio pruning engine.

Pipeline: ingest -> legal filter -> entity normalization -> 32-parameter
feature vectors -> hierarchical categorization -> LambdaMART ranking under a
strategic weighting profile -> claim-derived seed profiles matched against a
market-need knowledge graph -> ontology reports, all stepped through
human-review gates.
"""

__version__ = "0.1.0"
