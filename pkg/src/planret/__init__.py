"""planret: content-based retrieval of radiotherapy plans.

Learns latent embeddings of volumetric anatomy with five encoder families,
retrieves nearest-neighbor plans from a filterable database, and scores
retrieval and clustering quality. Ships a synthetic phantom generator so
the whole pipeline runs at desk scale.
"""

__version__ = "0.1.0"
