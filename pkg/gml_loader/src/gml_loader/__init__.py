"""gml_loader: read rdf2gml dataset directories into memory."""

from .loader import HeteroDataset, MissingManifest, ShapeMismatch, load, verify

__version__ = "0.1.0"
__all__ = ["HeteroDataset", "MissingManifest", "ShapeMismatch", "load", "verify", "__version__"]
