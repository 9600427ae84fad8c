import pytest

from rdf2gml.config import (
    FeatureConfig,
    load_config,
    parse_toml_subset,
    serialize_config,
)
from rdf2gml.errors import ConfigParseError, ValidationError

MINIMAL = """
[input]
path = "dump.nt"

[output]
dir = "out"

[node.paper]
class = "http://ex/Paper"

[edge.cites]
kind = "binary"
subject_node = "paper"
object_node = "paper"
properties = ["http://ex/cites"]
"""


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_minimal_config_fills_defaults(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL))
    assert cfg.features == FeatureConfig()
    assert cfg.features.embedding_dim == 128
    assert cfg.features.sparsity_threshold == 0.5
    assert cfg.features.identical_threshold == 0.99
    assert cfg.features.unique_threshold == 0.95
    assert cfg.features.correlation_threshold == 0.95
    assert cfg.features.one_hot_max_cardinality == 10
    assert cfg.features.nld_min_avg_tokens == 5.0
    assert cfg.nodes["paper"].class_iri == "http://ex/Paper"
    assert cfg.edges["cites"].kind == "binary"
    # relative paths resolve against the config directory
    assert cfg.input.path == str(tmp_path / "dump.nt")


def test_undeclared_node_reference_is_named(tmp_path):
    text = MINIMAL.replace('subject_node = "paper"', 'subject_node = "papr"')
    with pytest.raises(ValidationError) as exc:
        load_config(write(tmp_path, text))
    assert "papr" in str(exc.value)


def test_explicit_dim_and_model(tmp_path):
    text = MINIMAL + '\n[features]\nembedding_dim = 128\nembedding_model = "transe"\n'
    cfg = load_config(write(tmp_path, text))
    assert cfg.features.embedding_dim == 128
    assert cfg.features.embedding_model == "transe"


def test_errors_are_aggregated(tmp_path):
    text = """
[input]
lenient = true

[output]

[features]
sparsity_threshold = 1.5
embedding_model = "unknown"

[node.paper]
class = "http://ex/Paper"

[edge.bad]
kind = "binary"
subject_node = "missing"
object_node = "paper"
"""
    with pytest.raises(ValidationError) as exc:
        load_config(write(tmp_path, text))
    msg = str(exc.value)
    for needle in ("missing 'path'", "missing 'dir'", "sparsity_threshold", "unknown", "properties"):
        assert needle in msg
    assert len(exc.value.problems) >= 5


def test_kind_field_mismatch(tmp_path):
    text = MINIMAL + '\npath = ["http://ex/a", "http://ex/b"]\n'
    with pytest.raises(ValidationError) as exc:
        load_config(write(tmp_path, text))
    assert "path" in str(exc.value)


def test_rotate_needs_even_dim(tmp_path):
    text = MINIMAL + '\n[features]\nembedding_model = "rotate"\nembedding_dim = 15\n'
    with pytest.raises(ValidationError) as exc:
        load_config(write(tmp_path, text))
    assert "even" in str(exc.value)


def test_serialize_load_idempotent(tmp_path, fixtures_dir):
    cfg = load_config(fixtures_dir / "fixture.toml")
    text = serialize_config(cfg)
    cfg2 = load_config(write(tmp_path, text, name="normalized.toml"))
    assert cfg2 == cfg
    assert serialize_config(cfg2) == text


def test_env_fallback(tmp_path, monkeypatch):
    path = write(tmp_path, MINIMAL)
    monkeypatch.setenv("RDF2GML_CONFIG", str(path))
    cfg = load_config()
    assert cfg.nodes["paper"].class_iri == "http://ex/Paper"
    monkeypatch.delenv("RDF2GML_CONFIG")
    with pytest.raises(ConfigParseError):
        load_config()


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ConfigParseError) as exc:
        parse_toml_subset("[input]\npath : nope\n")
    assert "line 2" in str(exc.value)


def test_multiline_arrays_and_comments():
    raw = parse_toml_subset(
        """
# header comment
[node.a]                # section comment
class = "http://ex/A"   # value comment
nld_properties = [
  "http://ex/p1",
  "http://ex/p2",
]
"""
    )
    assert raw["node"]["a"]["nld_properties"] == ["http://ex/p1", "http://ex/p2"]
    assert raw["node"]["a"]["class"] == "http://ex/A"


def test_shipped_recipe_validates():
    from pathlib import Path

    recipe = Path(__file__).parent.parent / "recipes" / "soa-sw.toml"
    cfg = load_config(recipe)
    assert cfg.features.embedding_dim == 128
    assert cfg.features.embedding_model == "transe"
    assert set(cfg.nodes) == {"work", "author", "concept", "source", "institution", "publisher"}
    kinds = {e.kind for e in cfg.edges.values()}
    assert kinds == {"binary", "nary", "custom"}


def test_custom_edge_needs_select(tmp_path):
    text = MINIMAL + '\n[edge.co]\nkind = "custom"\nsubject_node = "paper"\nobject_node = "paper"\nquery = "?a <http://ex/p> ?b ."\n'
    with pytest.raises(ValidationError) as exc:
        load_config(write(tmp_path, text))
    assert "select" in str(exc.value)
