"""Edge table construction: binary, n-ary, multi-hop, and custom patterns."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import EdgeTypeConfig, FeatureConfig
from .content import FeatureColumn, infer_literal_type, transform_column
from .errors import DisconnectedPattern, RdfSyntaxError, UnboundSelect
from .nodes import NodeTable, node_term
from .store import TripleStore
from .terms import RDF_TYPE, Term, TermKind


@dataclass
class EdgeTable:
    edge_type: str
    src_node_type: str
    dst_node_type: str
    pairs: list[tuple[int, int]]
    edge_features: np.ndarray | None = None
    feature_blocks: list[tuple[str, int, int]] = field(default_factory=list)
    skipped: int = 0            # statements whose endpoints fell outside the node tables
    dangling: int = 0           # n-ary aux instances missing one side
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)


def _term_key(term: Term) -> str:
    return term.sort_key()


def build_binary_edges(
    store: TripleStore, cfg: EdgeTypeConfig, src: NodeTable, dst: NodeTable
) -> EdgeTable:
    """Union of the configured properties, endpoints restricted to the tables."""
    pairs: set[tuple[int, int]] = set()
    skipped = 0
    for prop in cfg.properties:
        for triple in store.match(p=Term.iri(prop)):
            s_id = src.id_of.get(_term_key(triple.subject))
            o_id = dst.id_of.get(_term_key(triple.object))
            if s_id is None or o_id is None:
                skipped += 1
                continue
            pairs.add((s_id, o_id))
    return EdgeTable(cfg.name, cfg.subject_node, cfg.object_node, sorted(pairs), skipped=skipped)


def build_nary_edges(
    store: TripleStore, cfg: EdgeTypeConfig, src: NodeTable, dst: NodeTable, feat: FeatureConfig
) -> EdgeTable:
    """Edges through auxiliary instances, with the aux datatype values as features.

    Aux instances are visited in lexicographic IRI order; the first instance
    that produces a given (src, dst) pair wins and supplies its features.
    """
    s2a = Term.iri(cfg.subject_to_aux_property)
    a2o = Term.iri(cfg.aux_to_object_property)
    aux_terms = sorted(
        (t.subject for t in store.match(p=Term.iri(RDF_TYPE), o=Term.iri(cfg.aux_class_iri))),
        key=_term_key,
    )
    winners: dict[tuple[int, int], Term] = {}
    dangling = 0
    skipped = 0
    for aux in aux_terms:
        subjects = [t.subject for t in store.match(p=s2a, o=aux)]
        objects = store.objects_of(aux, a2o)
        if not subjects or not objects:
            dangling += 1
            continue
        for s_term in subjects:
            s_id = src.id_of.get(_term_key(s_term))
            if s_id is None:
                skipped += 1
                continue
            for o_term in objects:
                o_id = dst.id_of.get(_term_key(o_term))
                if o_id is None:
                    skipped += 1
                    continue
                winners.setdefault((s_id, o_id), aux)
    pairs = sorted(winners)
    table = EdgeTable(cfg.name, cfg.subject_node, cfg.object_node, pairs, dangling=dangling, skipped=skipped)
    if cfg.feature_properties and pairs:
        table.edge_features, table.feature_blocks = _aux_features(
            store, [winners[p] for p in pairs], cfg.feature_properties, feat, table.warnings
        )
    return table


def _aux_features(store, aux_terms, properties, feat: FeatureConfig, warnings):
    """Encode aux datatype values per edge: numeric columns are min-max
    normalized; anything else follows the one-hot / label cardinality rule."""
    n = len(aux_terms)
    blocks = []
    layout = []
    offset = 0
    for prop in properties:
        col = FeatureColumn(prop, raw=[None] * n, all_values=[[] for _ in range(n)])
        for i, aux in enumerate(aux_terms):
            pairs = [
                (t.object.value, t.object.datatype)
                for t in store.match(s=aux, p=Term.iri(prop))
                if t.object.kind is TermKind.LITERAL
            ]
            col.all_values[i] = pairs
            if pairs:
                col.raw[i] = min(lex for lex, _ in pairs)
        sample = [p for pairs in col.all_values for p in pairs]
        inferred = infer_literal_type(sample, feat)
        # edge features are never text-encoded: free text falls back to the
        # categorical rule, every other type keeps its numeric transform
        col.inferred_type = "categorical" if inferred in ("nld", "categorical") else inferred
        transform_column(col, feat, warnings)
        blocks.append(col.transformed)
        layout.append((prop, offset, col.width))
        offset += col.width
    return np.hstack(blocks), layout


def build_multihop_edges(
    store: TripleStore, cfg: EdgeTypeConfig, src: NodeTable, dst: NodeTable
) -> EdgeTable:
    """Chain join along the property path; intermediates are unrestricted."""
    props = [Term.iri(p) for p in cfg.path]
    pairs: set[tuple[int, int]] = set()
    for s_key in src.entries:
        frontier = {node_term(s_key)}
        for prop in props:
            nxt: set[Term] = set()
            for node in frontier:
                if node.kind is TermKind.LITERAL:
                    continue
                nxt.update(store.objects_of(node, prop))
            frontier = nxt
            if not frontier:
                break
        s_id = src.id_of[s_key]
        for end in frontier:
            o_id = dst.id_of.get(_term_key(end))
            if o_id is not None:
                pairs.add((s_id, o_id))
    return EdgeTable(cfg.name, cfg.subject_node, cfg.object_node, sorted(pairs))


# --- custom pattern queries ---------------------------------------------------


@dataclass(frozen=True)
class PatternQuery:
    patterns: tuple[tuple[str, str, str], ...]   # each position: '?var' or IRI
    select: tuple[str, str]


def parse_pattern_query(query: str, select: list[str]) -> PatternQuery:
    """Parse `?s <iri> ?o .`-style triple patterns.

    Variables start with '?', constants are IRIs in angle brackets, and each
    pattern ends with '.'. The select pair must occur in the patterns, and
    all patterns must be connected through shared variables.
    """
    tokens: list[str] = []
    for raw in query.split():
        # a trailing dot terminates the pattern; dots inside <...> are IRI chars
        if raw != "." and raw.endswith("."):
            tokens.extend([raw[:-1], "."])
        else:
            tokens.append(raw)
    patterns: list[tuple[str, str, str]] = []
    current: list[str] = []
    for tok in tokens:
        if tok == ".":
            if len(current) != 3:
                raise RdfSyntaxError(f"pattern needs 3 terms before '.', got {current!r}")
            patterns.append(tuple(current))
            current = []
            continue
        if tok.startswith("?"):
            if len(tok) < 2:
                raise RdfSyntaxError("empty variable name")
            current.append(tok)
        elif tok.startswith("<") and tok.endswith(">"):
            current.append(tok[1:-1])
        else:
            raise RdfSyntaxError(f"unexpected token {tok!r} in pattern query")
    if current:
        raise RdfSyntaxError("pattern not terminated by '.'")
    if not patterns:
        raise RdfSyntaxError("empty pattern query")
    if len(select) != 2:
        raise UnboundSelect(f"select needs exactly 2 variables, got {select!r}")
    variables = {t for pat in patterns for t in pat if t.startswith("?")}
    for var in select:
        if var not in variables:
            raise UnboundSelect(f"select variable {var} never bound in the patterns")
    _check_connected(patterns)
    return PatternQuery(tuple(patterns), (select[0], select[1]))


def _check_connected(patterns):
    if len(patterns) <= 1:
        return
    groups = [set(t for t in pat if t.startswith("?")) for pat in patterns]
    merged = groups[0]
    pending = groups[1:]
    while pending:
        hit = [g for g in pending if g & merged]
        if not hit:
            raise DisconnectedPattern("triple patterns do not share variables")
        for g in hit:
            merged |= g
            pending.remove(g)


def eval_pattern_query(
    store: TripleStore, q: PatternQuery, cfg: EdgeTypeConfig, src: NodeTable, dst: NodeTable
) -> EdgeTable:
    """Index-backed nested-loop join in written pattern order.

    Bound positions are substituted per binding before each index lookup;
    self-pairs are dropped, endpoints filtered to the node tables.
    """
    def resolve(pos: str, binding: dict) -> Term | None:
        if pos.startswith("?"):
            return binding.get(pos)
        return Term.iri(pos)

    bindings: list[dict] = [{}]
    for pat in q.patterns:
        next_bindings: list[dict] = []
        for binding in bindings:
            s, p, o = (resolve(x, binding) for x in pat)
            for triple in store.match(s=s, p=p, o=o):
                new = dict(binding)
                ok = True
                # positions checked in order so a variable repeated within one
                # pattern must match itself
                for pos, term in ((pat[0], triple.subject), (pat[1], triple.predicate), (pat[2], triple.object)):
                    if not pos.startswith("?"):
                        continue
                    seen = new.get(pos)
                    if seen is None:
                        new[pos] = term
                    elif seen != term:
                        ok = False
                        break
                if ok:
                    next_bindings.append(new)
        bindings = next_bindings
        if not bindings:
            break

    pairs: set[tuple[int, int]] = set()
    src_var, dst_var = q.select
    for binding in bindings:
        s_term = binding[src_var]
        o_term = binding[dst_var]
        if s_term == o_term:
            continue
        s_id = src.id_of.get(_term_key(s_term))
        o_id = dst.id_of.get(_term_key(o_term))
        if s_id is None or o_id is None:
            continue
        pairs.add((s_id, o_id))
    return EdgeTable(cfg.name, cfg.subject_node, cfg.object_node, sorted(pairs))


def build_edges(
    store: TripleStore, cfg: EdgeTypeConfig, tables: dict[str, NodeTable], feat: FeatureConfig
) -> EdgeTable:
    src = tables[cfg.subject_node]
    dst = tables[cfg.object_node]
    if cfg.kind == "binary":
        return build_binary_edges(store, cfg, src, dst)
    if cfg.kind == "nary":
        return build_nary_edges(store, cfg, src, dst, feat)
    if cfg.kind == "multihop":
        return build_multihop_edges(store, cfg, src, dst)
    if cfg.kind == "custom":
        q = parse_pattern_query(cfg.query, cfg.select)
        return eval_pattern_query(store, q, cfg, src, dst)
    raise ValueError(f"unknown edge kind {cfg.kind!r}")
