"""Load an rdf2gml dataset directory into in-memory arrays.

The directory layout is the public contract of the compiler:

    manifest.json
    nodes/<type>/mapping.csv            node_id,iri
    nodes/<type>/features_content.csv   node_id,f0,...
    nodes/<type>/features_topology.csv  node_id,f0,...
    edges/<type>/edges.csv              src_id,dst_id
    edges/<type>/features.csv           edge_id,f0,...

Everything is validated against the manifest; any count or shape drift
raises ShapeMismatch. Conversion helpers for the common graph ML
frameworks are import-guarded so this package needs only numpy.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MissingManifest(Exception):
    pass


class ShapeMismatch(Exception):
    pass


@dataclass
class HeteroDataset:
    manifest: dict
    node_iris: dict[str, list[str]] = field(default_factory=dict)
    content_features: dict[str, np.ndarray] = field(default_factory=dict)
    topology_features: dict[str, np.ndarray] = field(default_factory=dict)
    edge_index: dict[str, np.ndarray] = field(default_factory=dict)       # (2, E) int64
    edge_features: dict[str, np.ndarray] = field(default_factory=dict)
    edge_endpoints: dict[str, tuple[str, str]] = field(default_factory=dict)

    @property
    def has_topology(self) -> bool:
        return any(m.size for m in self.topology_features.values())

    def to_torch_geometric(self):
        """Build a torch_geometric HeteroData object (needs torch + PyG)."""
        import torch
        from torch_geometric.data import HeteroData

        data = HeteroData()
        for name, iris in self.node_iris.items():
            feats = []
            if name in self.content_features and self.content_features[name].size:
                feats.append(self.content_features[name])
            if name in self.topology_features and self.topology_features[name].size:
                feats.append(self.topology_features[name])
            if feats:
                data[name].x = torch.from_numpy(np.hstack(feats)).float()
            data[name].num_nodes = len(iris)
        for name, index in self.edge_index.items():
            src, dst = self.edge_endpoints[name]
            data[(src, name, dst)].edge_index = torch.from_numpy(index).long()
            if name in self.edge_features:
                data[(src, name, dst)].edge_attr = torch.from_numpy(self.edge_features[name]).float()
        return data

    def to_dgl(self):
        """Build a DGL heterograph (needs torch + dgl)."""
        import dgl
        import torch

        graph_data = {}
        for name, index in self.edge_index.items():
            src, dst = self.edge_endpoints[name]
            graph_data[(src, name, dst)] = (torch.from_numpy(index[0]), torch.from_numpy(index[1]))
        num_nodes = {name: len(iris) for name, iris in self.node_iris.items()}
        g = dgl.heterograph(graph_data, num_nodes_dict=num_nodes)
        for name in self.node_iris:
            if name in self.content_features and self.content_features[name].size:
                g.nodes[name].data["content"] = torch.from_numpy(self.content_features[name]).float()
            if name in self.topology_features and self.topology_features[name].size:
                g.nodes[name].data["topology"] = torch.from_numpy(self.topology_features[name]).float()
        for name in self.edge_index:
            if name in self.edge_features:
                g.edges[name].data["feat"] = torch.from_numpy(self.edge_features[name]).float()
        return g


def _read_matrix(path: Path, id_header: str) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != id_header:
            raise ShapeMismatch(f"{path}: expected first column {id_header!r}")
        width = len(header) - 1
        rows = []
        for lineno, row in enumerate(reader):
            if len(row) != width + 1:
                raise ShapeMismatch(f"{path}: row {lineno} has {len(row)} fields, expected {width + 1}")
            if int(row[0]) != lineno:
                raise ShapeMismatch(f"{path}: ids must be dense and ordered; row {lineno} has id {row[0]}")
            rows.append([float(v) for v in row[1:]])
    return np.array(rows, dtype=np.float64).reshape(len(rows), width)


def load(dataset_dir) -> HeteroDataset:
    """Read and validate one dataset directory."""
    root = Path(dataset_dir)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise MissingManifest(f"no manifest.json under {root}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    ds = HeteroDataset(manifest=manifest)

    for name, entry in manifest.get("node_types", {}).items():
        node_dir = root / "nodes" / name
        iris = []
        with open(node_dir / "mapping.csv", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["node_id", "iri"]:
                raise ShapeMismatch(f"{node_dir}/mapping.csv: bad header {header}")
            for lineno, row in enumerate(reader):
                if int(row[0]) != lineno:
                    raise ShapeMismatch(f"{node_dir}/mapping.csv: non-contiguous ids")
                iris.append(row[1])
        if len(iris) != entry["count"]:
            raise ShapeMismatch(f"node type {name!r}: mapping has {len(iris)} rows, manifest says {entry['count']}")
        ds.node_iris[name] = iris

        content_path = node_dir / "features_content.csv"
        if content_path.exists():
            matrix = _read_matrix(content_path, "node_id")
            if matrix.shape != (entry["count"], entry["content_dim"]):
                raise ShapeMismatch(
                    f"node type {name!r}: content matrix {matrix.shape} != "
                    f"({entry['count']}, {entry['content_dim']})"
                )
            ds.content_features[name] = matrix
        elif entry.get("content_dim"):
            raise ShapeMismatch(f"node type {name!r}: manifest promises content features but file is missing")

        topo_path = node_dir / "features_topology.csv"
        if topo_path.exists():
            matrix = _read_matrix(topo_path, "node_id")
            if matrix.shape != (entry["count"], entry["topology_dim"]):
                raise ShapeMismatch(
                    f"node type {name!r}: topology matrix {matrix.shape} != "
                    f"({entry['count']}, {entry['topology_dim']})"
                )
            ds.topology_features[name] = matrix
        elif entry.get("topology_dim"):
            raise ShapeMismatch(f"node type {name!r}: manifest promises topology features but file is missing")

    for name, entry in manifest.get("edge_types", {}).items():
        edge_dir = root / "edges" / name
        pairs = []
        with open(edge_dir / "edges.csv", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["src_id", "dst_id"]:
                raise ShapeMismatch(f"{edge_dir}/edges.csv: bad header {header}")
            for row in reader:
                pairs.append((int(row[0]), int(row[1])))
        if len(pairs) != entry["count"]:
            raise ShapeMismatch(f"edge type {name!r}: {len(pairs)} edges on disk, manifest says {entry['count']}")
        index = np.array(pairs, dtype=np.int64).reshape(len(pairs), 2).T
        src_type, dst_type = entry["src"], entry["dst"]
        for ref in (src_type, dst_type):
            if ref not in manifest.get("node_types", {}):
                raise ShapeMismatch(f"edge type {name!r}: endpoint type {ref!r} not in manifest")
        n_src = manifest["node_types"][src_type]["count"]
        n_dst = manifest["node_types"][dst_type]["count"]
        if index.size and (index[0].max() >= n_src or index[1].max() >= n_dst or index.min() < 0):
            raise ShapeMismatch(f"edge type {name!r}: endpoint id outside node tables")
        ds.edge_index[name] = index
        ds.edge_endpoints[name] = (src_type, dst_type)

        feat_path = edge_dir / "features.csv"
        if feat_path.exists():
            matrix = _read_matrix(feat_path, "edge_id")
            if matrix.shape != (entry["count"], entry["feature_dim"]):
                raise ShapeMismatch(
                    f"edge type {name!r}: feature matrix {matrix.shape} != "
                    f"({entry['count']}, {entry['feature_dim']})"
                )
            ds.edge_features[name] = matrix
        elif entry.get("feature_dim"):
            raise ShapeMismatch(f"edge type {name!r}: manifest promises edge features but file is missing")

    return ds


def verify(dataset_dir) -> list[str]:
    """Returns a list of problems; empty means the directory validates."""
    try:
        load(dataset_dir)
    except (MissingManifest, ShapeMismatch, OSError, ValueError) as exc:
        return [f"{type(exc).__name__}: {exc}"]
    return []
