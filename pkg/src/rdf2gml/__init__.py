"""rdf2gml: compile RDF dumps into heterogeneous graph ML datasets."""

__version__ = "0.1.0"

from .config import load_config
from .parser import parse_dump
from .store import TripleStore
from .terms import Term, Triple

__all__ = ["Term", "Triple", "TripleStore", "parse_dump", "load_config", "__version__"]
