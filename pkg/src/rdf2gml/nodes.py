"""Node table extraction: one table per configured node type."""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import NodeTypeConfig
from .store import TripleStore
from .terms import RDF_TYPE, Term, TermKind


@dataclass
class NodeTable:
    """Dense 0-based ids for the members of one node type, in IRI order."""

    node_type: str
    entries: list[str]
    id_of: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id_of:
            self.id_of = {iri: i for i, iri in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, iri: str) -> bool:
        return iri in self.id_of


def extract_nodes(store: TripleStore, cfg: NodeTypeConfig) -> tuple[NodeTable, list[str]]:
    """Collect distinct subjects typed exactly as cfg.class_iri.

    No subclass closure. Blank-node members are skipped unless the node type
    opts in; ids are assigned in lexicographic order of the member key.
    Returns the table plus warning messages (empty node type).
    """
    warnings: list[str] = []
    members: set[str] = set()
    for triple in store.match(p=Term.iri(RDF_TYPE), o=Term.iri(cfg.class_iri)):
        subj = triple.subject
        if subj.kind is TermKind.BLANK and not cfg.include_blank_nodes:
            continue
        members.add(subj.sort_key())
    table = NodeTable(cfg.name, sorted(members))
    if not table.entries:
        warnings.append(f"node type {cfg.name!r}: no subjects typed <{cfg.class_iri}>")
    return table, warnings


def node_term(iri_key: str) -> Term:
    """Rebuild the Term for a node-table entry key."""
    if iri_key.startswith("_:"):
        return Term.blank(iri_key[2:])
    return Term.iri(iri_key)
