"""End-to-end pipeline: ingest, extract, featurize, build edges, write."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import ValidatedConfig
from .content import build_content_features
from .edges import build_edges
from .encoders import make_encoder
from .nodes import extract_nodes
from .parser import parse_dump
from .topology import Hyper, build_triple_ids, evaluate, export_node_embeddings, train
from .writer import DatasetBundle, write_dataset

log = logging.getLogger("rdf2gml")

FEATURE_MODES = ("content", "topology", "both")


@dataclass
class PipelineStats:
    triples_parsed: int = 0
    parse_issues: int = 0
    stage_seconds: dict = field(default_factory=dict)
    node_types: dict = field(default_factory=dict)
    edge_types: dict = field(default_factory=dict)
    embedding: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "triples_parsed": self.triples_parsed,
            "parse_issues": self.parse_issues,
            "stage_seconds": self.stage_seconds,
            "node_types": self.node_types,
            "edge_types": self.edge_types,
            "embedding": self.embedding,
            "warnings": self.warnings,
        }


class _Timer:
    def __init__(self, stats: PipelineStats, stage: str):
        self.stats = stats
        self.stage = stage

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.stats.stage_seconds[self.stage] = round(time.perf_counter() - self.t0, 6)
        return False


def _map_named(items: dict, fn, threads: int) -> dict:
    """Apply fn to each (name, value); merge results by name deterministically."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(items.keys(), pool.map(lambda kv: fn(*kv), items.items())))
    else:
        results = {name: fn(name, value) for name, value in items.items()}
    return results


def run_pipeline(
    cfg: ValidatedConfig,
    features: str = "both",
    out_dir=None,
    seed: int | None = None,
    threads: int = 1,
    lenient: bool | None = None,
) -> tuple[PipelineStats, dict]:
    """Run every stage and write the dataset; returns (stats, manifest)."""
    if features not in FEATURE_MODES:
        raise ValueError(f"features must be one of {FEATURE_MODES}")
    seed = cfg.features.seed if seed is None else seed
    lenient = cfg.input.lenient if lenient is None else lenient
    out = Path(out_dir or cfg.output.dir)
    stats = PipelineStats()

    with _Timer(stats, "ingest"):
        result = parse_dump(cfg.input.path, format=cfg.input.format, lenient=lenient)
        store = result.store
    stats.triples_parsed = len(store)
    stats.parse_issues = len(result.issues)
    for issue in result.issues:
        stats.warnings.append(f"parse: line {issue.line}: {issue.message}")
    log.info("parsed %d triples (%d issues)", len(store), len(result.issues))

    with _Timer(stats, "nodes"):
        tables = {}
        for name, node_cfg in cfg.nodes.items():
            table, warns = extract_nodes(store, node_cfg)
            tables[name] = table
            stats.warnings.extend(warns)
            stats.node_types[name] = {"count": len(table)}
            log.info("node type %s: %d nodes", name, len(table))

    bundle = DatasetBundle(tables=tables, config_bytes=cfg.source_bytes(), seed=seed)

    if features in ("content", "both"):
        with _Timer(stats, "content_features"):
            encoder = make_encoder(cfg.features)

            def one_type(name, table):
                return build_content_features(store, table, cfg.nodes[name], cfg.features, encoder)

            for name, (matrix, report) in _map_named(tables, one_type, threads).items():
                bundle.content[name] = matrix
                counts = report.counts()
                stats.node_types[name].update(
                    {
                        "selected_properties": counts["selected"],
                        "dropped_properties": counts["dropped"],
                        "content_dim": matrix.dim,
                    }
                )
                stats.warnings.extend(report.warnings)
            sidecar_warnings = getattr(encoder, "warnings", None)
            if sidecar_warnings:
                stats.warnings.extend(sidecar_warnings)

    if features in ("topology", "both"):
        with _Timer(stats, "topology_features"):
            idset = build_triple_ids(store, seed=seed)
            hyper = Hyper(
                model=cfg.features.embedding_model,
                dim=cfg.features.embedding_dim,
                learning_rate=cfg.features.learning_rate,
                margin=cfg.features.margin,
                negatives=cfg.features.negatives_per_positive,
                epochs=cfg.features.epochs,
                batch_size=cfg.features.batch_size,
                seed=seed,
                workers=threads,
            )
            emb = train(idset, hyper)
            metrics = evaluate(emb, idset, split="test")
            matrices, warns = export_node_embeddings(emb, idset, tables)
            bundle.topology = matrices
            bundle.embedding = emb
            bundle.embedding_terms = (idset.entities, idset.relations)
            stats.warnings.extend(warns)
            stats.embedding = {
                "model": emb.model,
                "dim": emb.dim,
                "entities": len(idset.entities),
                "relations": len(idset.relations),
                "triples": int(len(idset.triples)),
                "epochs": hyper.epochs,
                "final_loss": emb.loss_history[-1] if emb.loss_history else None,
                "loss_history": emb.loss_history,
                "eval": metrics,
            }
            for name, matrix in matrices.items():
                stats.node_types[name]["topology_dim"] = matrix.dim
            log.info("embedding eval: %s", metrics)

    with _Timer(stats, "edges"):
        def one_edge(name, edge_cfg):
            return build_edges(store, edge_cfg, tables, cfg.features)

        for name, table in _map_named(cfg.edges, one_edge, threads).items():
            bundle.edges[name] = table
            stats.edge_types[name] = {
                "count": len(table),
                "skipped_endpoints": table.skipped,
                "dangling_aux": table.dangling,
            }
            stats.warnings.extend(table.warnings)
            log.info("edge type %s: %d edges", name, len(table))

    with _Timer(stats, "write"):
        bundle.warnings = list(stats.warnings)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "stats.json", "w", encoding="utf-8", newline="") as fh:
            json.dump(stats.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        manifest = write_dataset(out, bundle, binary_sidecar=cfg.output.binary_sidecar)
    return stats, manifest


def _plan(cfg: ValidatedConfig) -> dict:
    return {
        "input": {"path": cfg.input.path, "format": cfg.input.format},
        "output": cfg.output.dir,
        "nodes": {n: c.class_iri for n, c in cfg.nodes.items()},
        "edges": {n: {"kind": e.kind, "src": e.subject_node, "dst": e.object_node} for n, e in cfg.edges.items()},
        "features": {
            "embedding_model": cfg.features.embedding_model,
            "embedding_dim": cfg.features.embedding_dim,
            "text_encoder": cfg.features.text_encoder,
            "seed": cfg.features.seed,
        },
    }


def dry_run_plan(cfg: ValidatedConfig) -> dict:
    """Validated execution plan without touching the dump body."""
    plan = _plan(cfg)
    plan["input"]["exists"] = Path(cfg.input.path).exists()
    return plan
