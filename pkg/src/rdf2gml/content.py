"""Content-based node features from datatype properties.

Covers the whole automatic path: per-property profiling, selection by
sparsity / identicality / uniqueness, literal-type inference, per-type
transformation into numeric blocks, Pearson-based redundancy pruning, and
assembly into one dense matrix per node type.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date, datetime, timezone

import numpy as np

from .config import FeatureConfig, NodeTypeConfig
from .errors import ShapeMismatch
from .nodes import NodeTable, node_term
from .store import TripleStore
from .terms import (
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATETIME,
    XSD_GYEAR,
    XSD_NUMERIC,
    TermKind,
)

log = logging.getLogger(__name__)

NLD = "nld"
CATEGORICAL = "categorical"
NUMERIC = "numeric"
BOOLEAN = "boolean"
YEAR = "year"
DATE = "date"

DROP_SPARSE = "sparse"
DROP_IDENTICAL = "identical"
DROP_UNIQUE = "unique_nominal"
DROP_CORRELATED = "correlated"


@dataclass
class PropertyProfile:
    property_iri: str
    fill_degree: float
    distinct_ratio: float
    top_value_ratio: float
    inferred_type: str
    dropped: str | None = None


@dataclass
class FeatureColumn:
    """Raw per-node values for one property plus its transformed block."""

    property_iri: str
    inferred_type: str = CATEGORICAL
    raw: list = field(default_factory=list)          # scalar per node (lexicographic min), None if absent
    all_values: list = field(default_factory=list)   # every (lexical, datatype) pair per node
    transformed: np.ndarray | None = None            # (n, width) float64
    width: int = 0
    encoding: str = ""                               # minmax | binary | onehot | label | nld
    categories: list[str] = field(default_factory=list)


@dataclass
class FeatureMatrix:
    node_type: str
    column_blocks: list[tuple[str, int, int]]        # (block name, offset, width)
    data: np.ndarray                                 # (n, d) float64

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass
class SelectionReport:
    profiles: list[PropertyProfile] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def counts(self) -> dict:
        out = {"selected": 0, "dropped": {}}
        for p in self.profiles:
            if p.dropped is None:
                out["selected"] += 1
            else:
                out["dropped"][p.dropped] = out["dropped"].get(p.dropped, 0) + 1
        return out


# --- profiling --------------------------------------------------------------


def collect_columns(store: TripleStore, table: NodeTable, cfg: NodeTypeConfig) -> dict[str, FeatureColumn]:
    """Gather literal values of every datatype property touching the table."""
    excluded = set(cfg.excluded_properties)
    columns: dict[str, FeatureColumn] = {}
    n = len(table)
    for row, key in enumerate(table.entries):
        for triple in store.match(s=node_term(key)):
            if triple.object.kind is not TermKind.LITERAL:
                continue
            prop = triple.predicate.value
            if prop in excluded:
                continue
            col = columns.get(prop)
            if col is None:
                col = FeatureColumn(prop, raw=[None] * n, all_values=[[] for _ in range(n)])
                columns[prop] = col
            col.all_values[row].append((triple.object.value, triple.object.datatype))
    for col in columns.values():
        for row, pairs in enumerate(col.all_values):
            if pairs:
                col.raw[row] = min(p[0] for p in pairs)
    return columns


def infer_literal_type(values: list[tuple[str, str | None]], cfg: FeatureConfig, force_nld: bool = False) -> str:
    """Pick one of the six literal types for a column sample.

    Declared XSD datatypes win; otherwise the lexical forms are inspected.
    The forced-NLD allowlist overrides everything.
    """
    if force_nld:
        return NLD
    declared = set()
    for _, dt in values:
        if dt is None:
            continue
        if dt == XSD_BOOLEAN:
            declared.add(BOOLEAN)
        elif dt == XSD_GYEAR:
            declared.add(YEAR)
        elif dt in (XSD_DATE, XSD_DATETIME):
            declared.add(DATE)
        elif dt in XSD_NUMERIC:
            declared.add(NUMERIC)
    if len(declared) == 1:
        return next(iter(declared))

    lexicals = [lex for lex, _ in values]
    if not lexicals:
        return CATEGORICAL
    if all(lex in ("true", "false") for lex in lexicals):
        return BOOLEAN
    numbers = _try_floats(lexicals)
    if numbers is not None:
        if all(v == int(v) and 1000 <= v <= 2999 for v in numbers):
            return YEAR
        return NUMERIC
    if all(_parse_date_like(lex) is not None for lex in lexicals):
        return DATE
    mean_tokens = sum(len(lex.split()) for lex in lexicals) / len(lexicals)
    if mean_tokens >= cfg.nld_min_avg_tokens:
        return NLD
    return CATEGORICAL


def _try_floats(lexicals) -> list[float] | None:
    out = []
    for lex in lexicals:
        try:
            out.append(float(lex))
        except ValueError:
            return None
    return out


def profile_properties(
    store: TripleStore, table: NodeTable, cfg: NodeTypeConfig, feat: FeatureConfig
) -> list[tuple[PropertyProfile, FeatureColumn]]:
    """One profile per datatype property, in lexicographic property order."""
    columns = collect_columns(store, table, cfg)
    n = len(table)
    out = []
    forced = set(cfg.nld_properties)
    for prop in sorted(columns):
        col = columns[prop]
        observed = [v for v in col.raw if v is not None]
        pairs = [p for pairs in col.all_values for p in pairs]
        col.inferred_type = infer_literal_type(pairs, feat, force_nld=prop in forced)
        fill = len(observed) / n if n else 0.0
        if observed:
            counts: dict[str, int] = {}
            for v in observed:
                counts[v] = counts.get(v, 0) + 1
            distinct_ratio = len(counts) / len(observed)
            top_ratio = max(counts.values()) / len(observed)
        else:
            distinct_ratio = top_ratio = 0.0
        out.append((PropertyProfile(prop, fill, distinct_ratio, top_ratio, col.inferred_type), col))
    return out


# --- selection ---------------------------------------------------------------


def select_properties(
    profiles: list[PropertyProfile], cfg: FeatureConfig
) -> tuple[list[PropertyProfile], list[PropertyProfile]]:
    """Split profiles into kept and dropped; drop reasons recorded in place.

    Uniqueness only disqualifies nominal (categorical) columns, never NLD.
    Correlation pruning happens later, after transformation.
    """
    selected, dropped = [], []
    for profile in sorted(profiles, key=lambda p: p.property_iri):
        if profile.fill_degree < cfg.sparsity_threshold:
            profile.dropped = DROP_SPARSE
        elif profile.top_value_ratio >= cfg.identical_threshold:
            profile.dropped = DROP_IDENTICAL
        elif profile.inferred_type == CATEGORICAL and profile.distinct_ratio >= cfg.unique_threshold:
            profile.dropped = DROP_UNIQUE
        (dropped if profile.dropped else selected).append(profile)
    return selected, dropped


# --- transformation ----------------------------------------------------------


def _parse_date_like(lex: str) -> float | None:
    """Unix timestamp of an ISO-8601 date or dateTime; naive times count as UTC."""
    lex = lex.strip()
    try:
        if "T" in lex:
            dt = datetime.fromisoformat(lex.replace("Z", "+00:00"))
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            return dt.timestamp()
        d = date.fromisoformat(lex)
        return datetime(d.year, d.month, d.day, tzinfo=timezone.utc).timestamp()
    except ValueError:
        return None


def _parse_by_type(lex: str, inferred_type: str) -> float | None:
    if inferred_type == BOOLEAN:
        if lex in ("true", "1"):
            return 1.0
        if lex in ("false", "0"):
            return 0.0
        return None
    if inferred_type == DATE:
        return _parse_date_like(lex)
    try:
        return float(lex)  # numeric and year
    except ValueError:
        return None


def _minmax(values: np.ndarray, mask: np.ndarray, warnings: list[str], prop: str) -> np.ndarray:
    """Scale observed entries to [0, 1]; missing entries become the mean."""
    out = np.zeros(values.shape[0], dtype=np.float64)
    if not mask.any():
        return out
    obs = values[mask]
    lo, hi = float(obs.min()), float(obs.max())
    if hi > lo:
        scaled = (obs - lo) / (hi - lo)
    else:
        scaled = np.full(obs.shape, 0.5)
        warnings.append(f"degenerate column <{prop}>: constant values, normalized to 0.5")
    out[mask] = scaled
    out[~mask] = float(scaled.mean())
    return out


def transform_column(col: FeatureColumn, cfg: FeatureConfig, warnings: list[str] | None = None) -> FeatureColumn:
    """Fill `transformed`, `width`, and `encoding` according to the literal type."""
    if warnings is None:
        warnings = []
    n = len(col.raw)
    if col.inferred_type == NLD:
        raise ValueError("NLD columns are encoded by the text encoder, not transform_column")

    if col.inferred_type == CATEGORICAL:
        observed_rows = [i for i, v in enumerate(col.raw) if v is not None]
        cats = sorted({col.raw[i] for i in observed_rows})
        col.categories = cats
        if not cats:
            col.transformed = np.zeros((n, 1))
            col.width, col.encoding = 1, "onehot"
            return col
        if len(cats) <= cfg.one_hot_max_cardinality:
            code = {c: k for k, c in enumerate(cats)}
            block = np.zeros((n, len(cats)), dtype=np.float64)
            for i in observed_rows:
                block[i, code[col.raw[i]]] = 1.0
            mean_row = block[observed_rows].mean(axis=0)
            for i in range(n):
                if col.raw[i] is None:
                    block[i] = mean_row
            col.transformed, col.width, col.encoding = block, len(cats), "onehot"
            return col
        code = {c: float(k) for k, c in enumerate(cats)}
        values = np.zeros(n)
        mask = np.zeros(n, dtype=bool)
        for i in observed_rows:
            values[i] = code[col.raw[i]]
            mask[i] = True
        col.transformed = _minmax(values, mask, warnings, col.property_iri).reshape(-1, 1)
        col.width, col.encoding = 1, "label"
        return col

    values = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    for i, lex in enumerate(col.raw):
        if lex is None:
            continue
        parsed = _parse_by_type(lex, col.inferred_type)
        if parsed is None:
            warnings.append(f"column <{col.property_iri}>: unparseable {col.inferred_type} value {lex!r}; treated as missing")
            continue
        values[i] = parsed
        mask[i] = True

    if col.inferred_type == BOOLEAN:
        out = values.copy()
        out[~mask] = float(values[mask].mean()) if mask.any() else 0.0
        col.transformed, col.width, col.encoding = out.reshape(-1, 1), 1, "binary"
        return col

    col.transformed = _minmax(values, mask, warnings, col.property_iri).reshape(-1, 1)
    col.width, col.encoding = 1, "minmax"
    return col


# --- redundancy pruning -------------------------------------------------------


def pearson(x, y) -> float:
    """Sample Pearson correlation; constant input logs a warning and yields 0."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("pearson needs two equal-length vectors of size >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        log.warning("pearson: constant input treated as correlation 0")
        return 0.0
    r = float((dx @ dy) / np.sqrt(vx * vy))
    return max(-1.0, min(1.0, r))


_PRUNABLE = ("minmax", "binary", "label")


def prune_correlated(
    columns: list[FeatureColumn], cfg: FeatureConfig, profiles: dict[str, PropertyProfile] | None = None
) -> tuple[list[FeatureColumn], list[str]]:
    """Drop the lexicographically-later column of each strongly correlated pair.

    Only single-width numeric-like encodings take part; one-hot and NLD
    blocks are exempt. Pairs are visited in sorted order, so of a mutually
    correlated clique only the lexicographically first column survives.
    """
    eligible = sorted((c for c in columns if c.encoding in _PRUNABLE), key=lambda c: c.property_iri)
    alive = {c.property_iri for c in eligible}
    dropped: list[str] = []
    for i, a in enumerate(eligible):
        if a.property_iri not in alive:
            continue
        for b in eligible[i + 1 :]:
            if b.property_iri not in alive:
                continue
            r = pearson(a.transformed[:, 0], b.transformed[:, 0])
            if abs(r) >= cfg.correlation_threshold:
                alive.discard(b.property_iri)
                dropped.append(b.property_iri)
                if profiles and b.property_iri in profiles:
                    profiles[b.property_iri].dropped = DROP_CORRELATED
    survivors = [c for c in columns if c.encoding not in _PRUNABLE or c.property_iri in alive]
    return survivors, dropped


# --- NLD encoding and assembly -------------------------------------------------


def nld_texts(table: NodeTable, nld_columns: list[FeatureColumn]) -> list[str]:
    """Per-node text: all values of each NLD property (lexicographic order),
    properties joined in the given order, single spaces throughout."""
    texts = []
    for row in range(len(table)):
        parts = []
        for col in nld_columns:
            vals = sorted(lex for lex, _ in col.all_values[row])
            if vals:
                parts.append(" ".join(vals))
        texts.append(" ".join(parts))
    return texts


def encode_nld(table: NodeTable, nld_columns: list[FeatureColumn], encoder, dim: int) -> np.ndarray:
    """One dim-wide vector per node; empty text maps to the zero vector."""
    if not nld_columns:
        return np.zeros((len(table), 0), dtype=np.float64)
    texts = nld_texts(table, nld_columns)
    block = np.asarray(encoder.encode_nodes(table.entries, texts), dtype=np.float64)
    if block.shape != (len(table), dim):
        raise ShapeMismatch(f"encoder returned {block.shape}, expected {(len(table), dim)}")
    return block


def assemble_feature_matrix(
    node_type: str, columns: list[FeatureColumn], nld_block: np.ndarray | None
) -> FeatureMatrix:
    """Concatenate the NLD block first, then property blocks in IRI order."""
    n_rows = None
    blocks: list[tuple[str, np.ndarray]] = []
    if nld_block is not None and nld_block.shape[1] > 0:
        blocks.append(("nld", nld_block))
    for col in sorted(columns, key=lambda c: c.property_iri):
        if col.transformed is None:
            raise ShapeMismatch(f"column <{col.property_iri}> was not transformed")
        blocks.append((col.property_iri, col.transformed))
    layout: list[tuple[str, int, int]] = []
    offset = 0
    for name, block in blocks:
        if n_rows is None:
            n_rows = block.shape[0]
        elif block.shape[0] != n_rows:
            raise ShapeMismatch(f"block {name!r} has {block.shape[0]} rows, expected {n_rows}")
        layout.append((name, offset, block.shape[1]))
        offset += block.shape[1]
    if not blocks:
        data = np.zeros((0, 0))
    else:
        data = np.hstack([b for _, b in blocks])
    if not np.isfinite(data).all():
        raise ShapeMismatch(f"non-finite values in feature matrix for {node_type!r}")
    return FeatureMatrix(node_type, layout, data)


def build_content_features(
    store: TripleStore,
    table: NodeTable,
    node_cfg: NodeTypeConfig,
    feat: FeatureConfig,
    encoder,
) -> tuple[FeatureMatrix, SelectionReport]:
    """Full per-node-type content pipeline: profile, select, transform, prune, assemble."""
    report = SelectionReport()
    profiled = profile_properties(store, table, node_cfg, feat)
    profiles = [p for p, _ in profiled]
    col_by_prop = {c.property_iri: c for _, c in profiled}
    report.profiles = profiles

    selected, _ = select_properties(profiles, feat)

    nld_cols: list[FeatureColumn] = []
    plain_cols: list[FeatureColumn] = []
    for profile in selected:
        col = col_by_prop[profile.property_iri]
        (nld_cols if col.inferred_type == NLD else plain_cols).append(col)

    for col in plain_cols:
        transform_column(col, feat, report.warnings)

    profile_map = {p.property_iri: p for p in profiles}
    survivors, _ = prune_correlated(plain_cols, feat, profile_map)

    # NLD concatenation order: allowlist order first, detected columns after.
    forced_order = {iri: i for i, iri in enumerate(node_cfg.nld_properties)}
    nld_cols.sort(key=lambda c: (0, forced_order[c.property_iri]) if c.property_iri in forced_order else (1, c.property_iri))
    nld_block = encode_nld(table, nld_cols, encoder, feat.embedding_dim) if nld_cols else None

    if not survivors and nld_block is None:
        report.warnings.append(f"node type {table.node_type!r}: no content features selected")
        matrix = FeatureMatrix(table.node_type, [], np.zeros((len(table), 0)))
        return matrix, report

    matrix = assemble_feature_matrix(table.node_type, survivors, nld_block)
    return matrix, report
