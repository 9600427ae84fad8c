import hashlib
import math
import random

import numpy as np
import pytest

from rdf2gml.config import FeatureConfig, NodeTypeConfig
from rdf2gml.content import (
    FeatureColumn,
    assemble_feature_matrix,
    build_content_features,
    infer_literal_type,
    pearson,
    profile_properties,
    prune_correlated,
    select_properties,
    transform_column,
)
from rdf2gml.encoders import HashingTextEncoder
from rdf2gml.nodes import extract_nodes

from oracles import brute_pearson, brute_prune, brute_select, date_to_unix

EX = "http://example.org/"
FEAT = FeatureConfig()


@pytest.fixture(scope="module")
def work_profiles(academic_store):
    table, _ = extract_nodes(academic_store, NodeTypeConfig("work", EX + "Work", nld_properties=[EX + "title"]))
    return table, profile_properties(
        academic_store, table, NodeTypeConfig("work", EX + "Work", nld_properties=[EX + "title"]), FEAT
    )


def _profile(profiles, prop):
    for p, _ in profiles:
        if p.property_iri == prop:
            return p
    raise KeyError(prop)


def test_profile_fill_and_distinct(work_profiles):
    _, profiles = work_profiles
    title = _profile(profiles, EX + "title")
    assert title.fill_degree == 1.0 and title.distinct_ratio == 1.0
    note = _profile(profiles, EX + "venueNote")
    assert note.fill_degree == 0.25
    cc = _profile(profiles, EX + "citationCount")
    assert cc.top_value_ratio == 0.5 and cc.distinct_ratio == 0.75


def test_inferred_types_on_fixture(work_profiles):
    _, profiles = work_profiles
    assert _profile(profiles, EX + "title").inferred_type == "nld"          # allowlist
    assert _profile(profiles, EX + "abstract").inferred_type == "nld"       # detected
    assert _profile(profiles, EX + "citationCount").inferred_type == "numeric"
    assert _profile(profiles, EX + "year").inferred_type == "year"
    assert _profile(profiles, EX + "peerReviewed").inferred_type == "boolean"
    assert _profile(profiles, EX + "published").inferred_type == "date"
    assert _profile(profiles, EX + "language").inferred_type == "categorical"


def test_selection_on_fixture(work_profiles):
    _, profiles = work_profiles
    selected, dropped = select_properties([p for p, _ in profiles], FEAT)
    reasons = {p.property_iri: p.dropped for p in dropped}
    assert reasons == {EX + "language": "identical", EX + "venueNote": "sparse"}
    assert {p.property_iri for p in selected} == {
        EX + "title", EX + "abstract", EX + "citationCount", EX + "year",
        EX + "peerReviewed", EX + "published",
    }


def test_unique_nominal_drops_non_nld_only():
    values = ["u1", "u2", "u3", "u4"]
    from rdf2gml.content import PropertyProfile

    nominal = PropertyProfile("http://p/nominal", 1.0, 1.0, 0.25, "categorical")
    nld = PropertyProfile("http://p/description", 1.0, 1.0, 0.25, "nld")
    selected, dropped = select_properties([nominal, nld], FEAT)
    assert [p.property_iri for p in dropped] == ["http://p/nominal"]
    assert dropped[0].dropped == "unique_nominal"
    assert [p.property_iri for p in selected] == ["http://p/description"]
    assert values  # silence linter


# --- literal type inference ---------------------------------------------------


def test_infer_declared_boolean():
    assert infer_literal_type([("true", "http://www.w3.org/2001/XMLSchema#boolean")], FEAT) == "boolean"


def test_infer_untyped_years():
    vals = [(v, None) for v in ("2005", "2013", "1998")]
    assert infer_literal_type(vals, FEAT) == "year"


def test_infer_numbers_outside_year_range():
    assert infer_literal_type([("10", None), ("3020", None)], FEAT) == "numeric"
    assert infer_literal_type([("2005.5", None), ("2006", None)], FEAT) == "numeric"


def test_infer_plain_bool_strings():
    assert infer_literal_type([("true", None), ("false", None)], FEAT) == "boolean"


def test_infer_dates_from_pattern():
    assert infer_literal_type([("2019-01-30", None), ("2020-02-02", None)], FEAT) == "date"


def test_infer_nld_by_token_count():
    text = "a long natural language description with many tokens in it"
    assert infer_literal_type([(text, None)], FEAT) == "nld"
    assert infer_literal_type([("short label", None)], FEAT) == "categorical"


def test_declared_type_beats_pattern():
    # looks like a year, declared as plain integer
    vals = [("2005", "http://www.w3.org/2001/XMLSchema#integer")]
    assert infer_literal_type(vals, FEAT) == "numeric"


# --- transforms ----------------------------------------------------------------


def _col(values, inferred):
    n = len(values)
    return FeatureColumn("http://p/x", inferred, raw=list(values), all_values=[[] for _ in range(n)])


def test_numeric_minmax():
    col = transform_column(_col(["0", "5", "10"], "numeric"), FEAT)
    assert col.transformed[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert col.encoding == "minmax"


def test_boolean_label_encoding():
    col = transform_column(_col(["true", "false", "true"], "boolean"), FEAT)
    assert col.transformed[:, 0].tolist() == [1.0, 0.0, 1.0]


def test_date_pipeline_epoch_day():
    col = transform_column(_col(["1970-01-01", "1970-01-02"], "date"), FEAT)
    assert col.transformed[:, 0].tolist() == [0.0, 1.0]
    # calendar oracle: one day is 86400 seconds
    assert date_to_unix("1970-01-01") == 0
    assert date_to_unix("1970-01-02") == 86400


def test_onehot_small_cardinality():
    col = transform_column(_col(["A", "B", "A"], "categorical"), FEAT)
    assert col.width == 2
    assert col.transformed.tolist() == [[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]


def test_label_encoding_above_cardinality():
    values = [f"cat{i:02d}" for i in range(12)]
    col = transform_column(_col(values, "categorical"), FEAT)
    assert col.width == 1 and col.encoding == "label"
    assert col.transformed[0, 0] == 0.0 and col.transformed[-1, 0] == 1.0
    assert np.all(np.diff(col.transformed[:, 0]) > 0)


def test_missing_values_get_column_mean():
    col = transform_column(_col(["0", None, "10"], "numeric"), FEAT)
    observed_mean = np.mean([0.0, 1.0])
    assert col.transformed[1, 0] == pytest.approx(observed_mean, abs=1e-12)
    # mean unchanged by the fill
    assert np.mean(col.transformed[:, 0]) == pytest.approx(observed_mean, abs=1e-9)


def test_onehot_missing_rows_equal_mean_vector():
    col = transform_column(_col(["A", None, "B", "A"], "categorical"), FEAT)
    assert col.transformed[1].tolist() == pytest.approx([2 / 3, 1 / 3], abs=1e-12)
    observed = [0, 2, 3]
    assert all(col.transformed[i].sum() == 1.0 for i in observed)


def test_constant_column_degenerates_to_half():
    warnings = []
    col = transform_column(_col(["7", "7", "7"], "numeric"), FEAT, warnings)
    assert col.transformed[:, 0].tolist() == [0.5, 0.5, 0.5]
    assert len(warnings) == 1 and "degenerate" in warnings[0]


def test_all_missing_column_is_zeros():
    col = transform_column(_col([None, None], "numeric"), FEAT)
    assert col.transformed[:, 0].tolist() == [0.0, 0.0]


def test_unparseable_value_counts_as_missing():
    warnings = []
    col = transform_column(_col(["1", "oops", "3"], "numeric"), FEAT, warnings)
    assert col.transformed[1, 0] == pytest.approx(0.5)
    assert any("unparseable" in w for w in warnings)


from hypothesis import given, settings
from hypothesis import strategies as st


@settings(max_examples=80, deadline=None)
@given(st.lists(st.one_of(st.none(), st.floats(-1e6, 1e6)), min_size=2, max_size=60))
def test_minmax_and_meanfill_invariants(values):
    raw = [None if v is None else repr(v) for v in values]
    if not any(v is not None for v in raw):
        return
    col = transform_column(_col(raw, "numeric"), FEAT)
    out = col.transformed[:, 0]
    assert np.isfinite(out).all()
    assert out.min() >= 0.0 and out.max() <= 1.0
    observed = [out[i] for i, v in enumerate(raw) if v is not None]
    if len(set(observed)) > 1:
        assert min(observed) == 0.0 and max(observed) == 1.0
    # filling with the mean leaves the mean unchanged
    assert abs(out.mean() - np.mean(observed)) <= 1e-9


# --- pearson -------------------------------------------------------------------


def test_pearson_perfect_linear():
    assert pearson([1, 2, 3], [2, 4, 6]) == 1.0
    assert pearson([1, 2, 3], [3, 2, 1]) == -1.0


def test_pearson_half():
    assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-15)


def test_pearson_constant_input_is_zero():
    assert pearson([1, 1, 1], [1, 2, 3]) == 0.0


def test_pearson_matches_brute_force():
    rng = random.Random(1234)
    for _ in range(100):
        n = rng.randint(2, 40)
        xs = [rng.uniform(-100, 100) for _ in range(n)]
        ys = [rng.uniform(-100, 100) for _ in range(n)]
        if len(set(xs)) == 1 or len(set(ys)) == 1:
            continue
        assert pearson(xs, ys) == pytest.approx(brute_pearson(xs, ys), abs=1e-9)


# --- correlation pruning ---------------------------------------------------------


def _numeric_col(prop, values):
    col = FeatureColumn(prop, "numeric", raw=[str(v) for v in values], all_values=[[] for _ in values])
    return transform_column(col, FEAT)


def test_prune_drops_later_iri():
    a = _numeric_col("http://p/a", [1, 2, 3, 4])
    b = _numeric_col("http://p/b", [2, 4, 6, 8])
    survivors, dropped = prune_correlated([a, b], FEAT)
    assert [c.property_iri for c in survivors] == ["http://p/a"]
    assert dropped == ["http://p/b"]


def test_prune_keeps_uncorrelated():
    a = _numeric_col("http://p/a", [1, 2, 3])
    b = _numeric_col("http://p/b", [1, 3, 2])
    survivors, dropped = prune_correlated([a, b], FEAT)
    assert len(survivors) == 2 and dropped == []


def test_prune_clique_keeps_first():
    a = _numeric_col("http://p/a", [1, 2, 3, 4])
    b = _numeric_col("http://p/b", [2, 4, 6, 8])
    c = _numeric_col("http://p/c", [5, 4, 3, 2])  # negatively correlated
    survivors, dropped = prune_correlated([a, b, c], FEAT)
    assert [x.property_iri for x in survivors] == ["http://p/a"]
    assert set(dropped) == {"http://p/b", "http://p/c"}


def test_onehot_blocks_exempt_from_pruning():
    a = _numeric_col("http://p/a", [1, 2, 3])
    onehot = transform_column(_col(["x", "y", "x"], "categorical"), FEAT)
    onehot.property_iri = "http://p/z"
    survivors, dropped = prune_correlated([a, onehot], FEAT)
    assert len(survivors) == 2 and dropped == []


# --- assembly ---------------------------------------------------------------------


def test_assemble_widths_add_up():
    num = _numeric_col("http://p/n", [0, 5, 10, 2])
    cat = transform_column(_col(["A", "B", "A", "B"], "categorical"), FEAT)
    cat.property_iri = "http://p/c"
    m = assemble_feature_matrix("work", [num, cat], None)
    assert m.data.shape == (4, 3)
    assert m.column_blocks == [("http://p/c", 0, 2), ("http://p/n", 2, 1)]


def test_assemble_empty_is_n_by_zero(academic_store):
    table, _ = extract_nodes(academic_store, NodeTypeConfig("work", EX + "Work"))
    cfg = NodeTypeConfig(
        "work", EX + "Work",
        excluded_properties=[EX + p for p in
                             ("title", "abstract", "citationCount", "year", "peerReviewed", "published",
                              "language", "venueNote")],
    )
    matrix, report = build_content_features(academic_store, table, cfg, FEAT, HashingTextEncoder(FEAT.embedding_dim))
    assert matrix.data.shape == (4, 0)
    assert any("no content features" in w for w in report.warnings)


def test_nld_block_comes_first(academic_store):
    cfg = NodeTypeConfig("work", EX + "Work", nld_properties=[EX + "title"])
    table, _ = extract_nodes(academic_store, cfg)
    feat = FeatureConfig(embedding_dim=8)
    matrix, _ = build_content_features(academic_store, table, cfg, feat, HashingTextEncoder(8))
    names = [b[0] for b in matrix.column_blocks]
    assert names == ["nld", EX + "citationCount", EX + "peerReviewed", EX + "published", EX + "year"]


# --- fixture golden matrices (independent oracle) -----------------------------------


def _oracle_hash_vector(text: str, dim: int) -> list:
    """Reimplements the documented hashing scheme without the encoder class."""
    vec = [0.0] * dim
    for token in text.lower().split():
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9).digest()
        bucket = int.from_bytes(digest[:8], "little") % dim
        vec[bucket] += 1.0 if digest[8] & 1 == 0 else -1.0
    norm = math.sqrt(math.fsum(v * v for v in vec))
    return [v / norm for v in vec] if norm > 0 else vec


WORK_TEXTS = {
    "w1": ("Graph Learning Basics",
           "We survey representation learning on graphs covering message passing spectral methods and sampling strategies for large networks ."),
    "w2": ("Deep Graph Networks",
           "This paper proposes a deep architecture for heterogeneous graphs that mixes relational attention with residual propagation layers ."),
    "w3": ("Relational Models Revisited",
           "We revisit classic relational learning models and benchmark them against modern neural approaches on citation and co purchase data ."),
    "w4": ("Knowledge Graph Embedding Survey",
           "A comprehensive survey of embedding techniques for knowledge graphs including translation rotation and bilinear scoring families with training tricks ."),
}


def test_work_matrix_against_oracle(academic_store):
    cfg = NodeTypeConfig("work", EX + "Work", nld_properties=[EX + "title"])
    table, _ = extract_nodes(academic_store, cfg)
    feat = FeatureConfig(embedding_dim=8)
    matrix, _ = build_content_features(academic_store, table, cfg, feat, HashingTextEncoder(8))
    assert matrix.data.shape == (4, 12)

    # NLD block: title + abstract, hand-recomputed
    for row, wid in enumerate(("w1", "w2", "w3", "w4")):
        title, abstract = WORK_TEXTS[wid]
        expected = _oracle_hash_vector(title + " " + abstract, 8)
        assert matrix.data[row, :8] == pytest.approx(expected, abs=1e-12)

    # citationCount {10,10,12,15} min-max
    assert matrix.data[:, 8].tolist() == [0.0, 0.0, 0.4, 1.0]
    # peerReviewed {true,false,true,true}
    assert matrix.data[:, 9].tolist() == [1.0, 0.0, 1.0, 1.0]
    # published dates via the calendar oracle
    ts = [date_to_unix(d) for d in ("1999-12-31", "2010-06-15", "2001-02-28", "2020-07-04")]
    lo, hi = min(ts), max(ts)
    expected_dates = [(t - lo) / (hi - lo) for t in ts]
    assert matrix.data[:, 10].tolist() == expected_dates
    # year {2005,2008,2013,2013} min-max
    assert matrix.data[:, 11].tolist() == [0.0, 0.375, 1.0, 1.0]


def test_author_matrix_against_oracle(academic_store):
    cfg = NodeTypeConfig("author", EX + "Author")
    table, _ = extract_nodes(academic_store, cfg)
    matrix, report = build_content_features(academic_store, table, cfg, FEAT, HashingTextEncoder(FEAT.embedding_dim))
    # name dropped (unique nominal); affiliation one-hot [FU Berlin, KIT]; hIndex min-max
    assert matrix.data.shape == (3, 3)
    assert matrix.column_blocks == [(EX + "affiliation", 0, 2), (EX + "hIndex", 2, 1)]
    assert matrix.data.tolist() == [[0, 1, 0], [0, 1, 0.5], [1, 0, 1]]
    reasons = {p.property_iri: p.dropped for p in report.profiles if p.dropped}
    assert reasons == {EX + "name": "unique_nominal"}


# --- randomized selection oracle (scaled-down; full run in acceptance) ---------------


def random_table_decisions(seed: int, cfg: FeatureConfig):
    """Build a random raw table, run selection+pruning, and the brute oracle."""
    rng = random.Random(seed)
    n_nodes = rng.randint(2, 50)
    n_props = rng.randint(1, 10)
    raw = {}
    types = {}
    for i in range(n_props):
        prop = f"http://p/{i:02d}"
        kind = rng.choice(["numeric", "categorical", "boolean", "year", "nld"])
        types[prop] = kind
        fill = rng.uniform(0.2, 1.0)
        values = []
        pool = [f"v{k}" for k in range(rng.randint(1, max(2, n_nodes)))]
        for _ in range(n_nodes):
            if rng.random() > fill:
                values.append(None)
            elif kind == "numeric":
                values.append(str(rng.choice([0, 1, 5, 7, 9, 11])))
            elif kind == "year":
                values.append(str(rng.choice([2001, 2002, 2010, 2020])))
            elif kind == "boolean":
                values.append(rng.choice(["true", "false"]))
            elif kind == "nld":
                values.append("long text " + " ".join(rng.choice("abcdef") for _ in range(8)))
            else:
                values.append(rng.choice(pool))
        raw[prop] = values
    return raw, types


def test_selection_matches_brute_oracle_sample():
    from rdf2gml.content import PropertyProfile

    cfg = FeatureConfig()
    for seed in range(25):
        raw, types = random_table_decisions(seed, cfg)
        profiles = []
        columns = []
        for prop, values in raw.items():
            observed = [v for v in values if v is not None]
            counts = {}
            for v in observed:
                counts[v] = counts.get(v, 0) + 1
            profile = PropertyProfile(
                prop,
                len(observed) / len(values),
                len(counts) / len(observed) if observed else 0.0,
                max(counts.values()) / len(observed) if observed else 0.0,
                types[prop],
            )
            profiles.append(profile)
            columns.append(FeatureColumn(prop, types[prop], raw=list(values), all_values=[[] for _ in values]))
        selected, dropped = select_properties(profiles, cfg)
        want = brute_select(raw, types, cfg)
        got = {p.property_iri: p.dropped for p in profiles}
        assert got == want, f"seed {seed}"
