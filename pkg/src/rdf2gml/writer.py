"""Serialize the compiled dataset into its on-disk layout.

Layout (all CSV, LF line endings, floats printed with 9 significant digits):

    manifest.json                      written last; acts as commit marker
    nodes/<type>/mapping.csv           node_id,iri
    nodes/<type>/features_content.csv  node_id,f0,...   (when produced)
    nodes/<type>/features_topology.csv node_id,f0,...   (when produced)
    edges/<type>/edges.csv             src_id,dst_id
    edges/<type>/features.csv          edge feature matrix (when present)
    embeddings.bin / embeddings.terms.tsv   trained checkpoint (topology mode)

The exact schemas are documented in docs/format.md.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .content import FeatureMatrix
from .edges import EdgeTable
from .errors import IoError, ShapeMismatch
from .nodes import NodeTable


@dataclass
class DatasetBundle:
    tables: dict[str, NodeTable]
    content: dict[str, FeatureMatrix] = field(default_factory=dict)
    topology: dict[str, FeatureMatrix] = field(default_factory=dict)
    edges: dict[str, EdgeTable] = field(default_factory=dict)
    config_bytes: bytes = b""
    seed: int = 0
    warnings: list[str] = field(default_factory=list)
    embedding: object | None = None        # trained EmbeddingModel, optional
    embedding_terms: tuple[list[str], list[str]] | None = None


def format_float(x: float) -> str:
    return format(float(x), ".9g")


def _write_matrix_csv(path: Path, matrix: np.ndarray, id_header: str = "node_id"):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([id_header] + [f"f{i}" for i in range(matrix.shape[1])])
        for i in range(matrix.shape[0]):
            writer.writerow([i] + [format_float(v) for v in matrix[i]])


def _write_matrix_binary(path: Path, matrix: np.ndarray):
    # same idea as the embedding checkpoint: shape header + little-endian f32 rows
    import struct

    with open(path, "wb") as fh:
        fh.write(b"GMLMAT01")
        fh.write(struct.pack("<QQ", matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.astype("<f4").tobytes(order="C"))


def write_dataset(out_dir, bundle: DatasetBundle, binary_sidecar: bool = False) -> dict:
    """Write every table and matrix, then the manifest. Returns the manifest."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc

    manifest: dict = {
        "tool": {"name": "rdf2gml", "version": __version__},
        "config_sha256": hashlib.sha256(bundle.config_bytes).hexdigest(),
        "seed": bundle.seed,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "node_types": {},
        "edge_types": {},
        "warnings": list(bundle.warnings),
    }

    for name, table in bundle.tables.items():
        node_dir = out / "nodes" / name
        node_dir.mkdir(parents=True, exist_ok=True)
        with open(node_dir / "mapping.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["node_id", "iri"])
            for i, iri in enumerate(table.entries):
                writer.writerow([i, iri])
        entry = {"count": len(table), "content_dim": 0, "content_blocks": [], "topology_dim": 0}
        cm = bundle.content.get(name)
        if cm is not None:
            if cm.data.shape[0] != len(table):
                raise ShapeMismatch(f"content matrix rows != node count for {name!r}")
            _write_matrix_csv(node_dir / "features_content.csv", cm.data)
            if binary_sidecar:
                _write_matrix_binary(node_dir / "features_content.bin", cm.data)
            entry["content_dim"] = cm.dim
            entry["content_blocks"] = [
                {"block": b, "offset": o, "width": w} for b, o, w in cm.column_blocks
            ]
            if cm.dim == 0:
                manifest["warnings"].append(f"node type {name!r}: empty content feature matrix")
        tm = bundle.topology.get(name)
        if tm is not None:
            if tm.data.shape[0] != len(table):
                raise ShapeMismatch(f"topology matrix rows != node count for {name!r}")
            _write_matrix_csv(node_dir / "features_topology.csv", tm.data)
            if binary_sidecar:
                _write_matrix_binary(node_dir / "features_topology.bin", tm.data)
            entry["topology_dim"] = tm.dim
        manifest["node_types"][name] = entry

    for name, table in bundle.edges.items():
        edge_dir = out / "edges" / name
        edge_dir.mkdir(parents=True, exist_ok=True)
        with open(edge_dir / "edges.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["src_id", "dst_id"])
            for s, d in table.pairs:
                writer.writerow([s, d])
        entry = {
            "count": len(table),
            "src": table.src_node_type,
            "dst": table.dst_node_type,
            "feature_dim": 0,
            "skipped_endpoints": table.skipped,
            "dangling_aux": table.dangling,
        }
        if table.edge_features is not None:
            if table.edge_features.shape[0] != len(table.pairs):
                raise ShapeMismatch(f"edge feature rows != edge count for {name!r}")
            _write_matrix_csv(edge_dir / "features.csv", table.edge_features, id_header="edge_id")
            entry["feature_dim"] = int(table.edge_features.shape[1])
            entry["feature_blocks"] = [
                {"block": b, "offset": o, "width": w} for b, o, w in table.feature_blocks
            ]
        manifest["edge_types"][name] = entry

    if bundle.embedding is not None:
        from .topology import write_checkpoint

        write_checkpoint(out / "embeddings.bin", bundle.embedding)
        if bundle.embedding_terms is not None:
            ents, rels = bundle.embedding_terms
            with open(out / "embeddings.terms.tsv", "w", encoding="utf-8", newline="") as fh:
                for i, key in enumerate(ents):
                    fh.write(f"entity\t{i}\t{key}\n")
                for i, key in enumerate(rels):
                    fh.write(f"relation\t{i}\t{key}\n")

    with open(out / "manifest.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
