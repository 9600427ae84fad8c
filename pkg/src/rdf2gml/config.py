"""Single-file pipeline configuration: parsing, validation, serialization.

The file uses TOML-style sections. Supported value syntax is the subset
needed here: basic/literal strings, integers, floats, booleans, and arrays
of scalars (single- or multi-line). Sections: [input], [output], [features],
[node.<name>], [edge.<name>].
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigParseError, ValidationError

EDGE_KINDS = ("binary", "nary", "multihop", "custom")
EMBEDDING_MODELS = ("transe", "distmult", "complex", "rotate")
TEXT_ENCODERS = ("hashing", "external")


@dataclass
class InputConfig:
    path: str = ""
    format: str | None = None
    lenient: bool = False


@dataclass
class OutputConfig:
    dir: str = ""
    binary_sidecar: bool = False


@dataclass
class FeatureConfig:
    embedding_dim: int = 128
    sparsity_threshold: float = 0.5
    identical_threshold: float = 0.99
    unique_threshold: float = 0.95
    correlation_threshold: float = 0.95
    one_hot_max_cardinality: int = 10
    nld_min_avg_tokens: float = 5.0
    text_encoder: str = "hashing"
    embedding_model: str = "transe"
    seed: int = 0
    learning_rate: float = 0.01
    margin: float = 1.0
    negatives_per_positive: int = 1
    epochs: int = 100
    batch_size: int = 512
    encoder_sidecar: str | None = None
    encoder_command: str | None = None


@dataclass
class NodeTypeConfig:
    name: str
    class_iri: str
    nld_properties: list[str] = field(default_factory=list)
    excluded_properties: list[str] = field(default_factory=list)
    include_blank_nodes: bool = False


@dataclass
class EdgeTypeConfig:
    name: str
    kind: str
    subject_node: str
    object_node: str
    properties: list[str] = field(default_factory=list)
    aux_class_iri: str = ""
    subject_to_aux_property: str = ""
    aux_to_object_property: str = ""
    feature_properties: list[str] = field(default_factory=list)
    path: list[str] = field(default_factory=list)
    query: str = ""
    select: list[str] = field(default_factory=list)


@dataclass
class ValidatedConfig:
    input: InputConfig
    output: OutputConfig
    features: FeatureConfig
    nodes: dict[str, NodeTypeConfig]
    edges: dict[str, EdgeTypeConfig]
    source_path: str | None = field(default=None, compare=False)

    def source_bytes(self) -> bytes:
        if self.source_path:
            try:
                return Path(self.source_path).read_bytes()
            except OSError:
                pass
        return serialize_config(self).encode("utf-8")


# --- TOML-subset reader ----------------------------------------------------


def _parse_scalar(tok: str, lineno: int):
    if tok.startswith('"'):
        if not tok.endswith('"') or len(tok) < 2:
            raise ConfigParseError(f"line {lineno}: unterminated string")
        body = tok[1:-1]
        out, i = [], 0
        while i < len(body):
            c = body[i]
            if c == "\\":
                if i + 1 >= len(body):
                    raise ConfigParseError(f"line {lineno}: dangling escape")
                e = body[i + 1]
                mapped = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}.get(e)
                if mapped is None:
                    raise ConfigParseError(f"line {lineno}: unsupported escape \\{e}")
                out.append(mapped)
                i += 2
            else:
                out.append(c)
                i += 1
        return "".join(out)
    if tok.startswith("'"):
        if not tok.endswith("'") or len(tok) < 2:
            raise ConfigParseError(f"line {lineno}: unterminated string")
        return tok[1:-1]
    if tok == "true":
        return True
    if tok == "false":
        return False
    try:
        if any(c in tok for c in ".eE") and not tok.lstrip("+-").isdigit():
            return float(tok)
        return int(tok)
    except ValueError:
        raise ConfigParseError(f"line {lineno}: cannot parse value {tok!r}") from None


def _split_array_items(body: str, lineno: int) -> list[str]:
    items, cur, quote = [], [], None
    for c in body:
        if quote:
            cur.append(c)
            if c == quote and (len(cur) < 2 or cur[-2] != "\\"):
                quote = None
        elif c in "\"'":
            quote = c
            cur.append(c)
        elif c == ",":
            items.append("".join(cur).strip())
            cur = []
        else:
            cur.append(c)
    if quote:
        raise ConfigParseError(f"line {lineno}: unterminated string in array")
    tail = "".join(cur).strip()
    if tail:
        items.append(tail)
    return [i for i in items if i]


def parse_toml_subset(text: str) -> dict:
    """Parse the config file syntax into nested dicts."""
    root: dict = {}
    section = root
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        comment = _find_comment(line)
        if comment >= 0:
            line = line[:comment].strip()
            if not line:
                continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigParseError(f"line {lineno}: malformed section header")
            path = line[1:-1].strip()
            if not path:
                raise ConfigParseError(f"line {lineno}: empty section name")
            section = root
            for part in path.split("."):
                part = part.strip().strip('"')
                if not part:
                    raise ConfigParseError(f"line {lineno}: empty section name component")
                section = section.setdefault(part, {})
                if not isinstance(section, dict):
                    raise ConfigParseError(f"line {lineno}: section {path!r} collides with a value")
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().strip('"')
        value = value.strip()
        if not key:
            raise ConfigParseError(f"line {lineno}: empty key")
        if value.startswith("["):
            # gather a possibly multi-line array
            while "]" not in value:
                if i >= len(lines):
                    raise ConfigParseError(f"line {lineno}: unterminated array")
                nxt = lines[i].strip()
                cut = _find_comment(nxt)
                if cut >= 0:
                    nxt = nxt[:cut].strip()
                value += " " + nxt
                i += 1
            body = value[1 : value.rindex("]")]
            section[key] = [_parse_scalar(tok, lineno) for tok in _split_array_items(body, lineno)]
        else:
            section[key] = _parse_scalar(value, lineno)
    return root


def _find_comment(value: str) -> int:
    quote = None
    for idx, c in enumerate(value):
        if quote:
            if c == quote and value[idx - 1] != "\\":
                quote = None
        elif c in "\"'":
            quote = c
        elif c == "#":
            return idx
    return -1


# --- validation -------------------------------------------------------------

_THRESHOLDS = ("sparsity_threshold", "identical_threshold", "unique_threshold", "correlation_threshold")


def _coerce(dc_cls, data: dict, context: str, problems: list[str], **extra):
    allowed = {f.name for f in fields(dc_cls)}
    kwargs = dict(extra)
    for key, value in data.items():
        if key not in allowed:
            problems.append(f"{context}: unknown key {key!r}")
            continue
        kwargs[key] = value
    try:
        return dc_cls(**kwargs)
    except TypeError as exc:
        problems.append(f"{context}: {exc}")
        return None


def validate(raw: dict, base_dir: Path | None = None) -> ValidatedConfig:
    problems: list[str] = []

    input_cfg = _coerce(InputConfig, raw.get("input", {}), "[input]", problems) or InputConfig()
    output_cfg = _coerce(OutputConfig, raw.get("output", {}), "[output]", problems) or OutputConfig()
    feat = _coerce(FeatureConfig, raw.get("features", {}), "[features]", problems) or FeatureConfig()

    if not input_cfg.path:
        problems.append("[input]: missing 'path'")
    elif base_dir is not None and not Path(input_cfg.path).is_absolute():
        input_cfg.path = str(base_dir / input_cfg.path)
    if input_cfg.format not in (None, "ntriples", "turtle"):
        problems.append(f"[input]: unknown format {input_cfg.format!r} (ntriples or turtle)")
    if not output_cfg.dir:
        problems.append("[output]: missing 'dir'")
    elif base_dir is not None and not Path(output_cfg.dir).is_absolute():
        output_cfg.dir = str(base_dir / output_cfg.dir)

    if feat.embedding_dim <= 0:
        problems.append("[features]: embedding_dim must be positive")
    if feat.embedding_model not in EMBEDDING_MODELS:
        problems.append(f"[features]: unknown embedding_model {feat.embedding_model!r}")
    elif feat.embedding_model in ("rotate", "complex") and feat.embedding_dim % 2:
        problems.append(f"[features]: embedding_dim must be even for {feat.embedding_model} (paired real/imaginary layout)")
    if feat.text_encoder not in TEXT_ENCODERS:
        problems.append(f"[features]: unknown text_encoder {feat.text_encoder!r}")
    if feat.text_encoder == "external" and not (feat.encoder_sidecar or feat.encoder_command):
        problems.append("[features]: text_encoder 'external' needs encoder_sidecar or encoder_command")
    for name in _THRESHOLDS:
        v = getattr(feat, name)
        if not isinstance(v, (int, float)) or not (0.0 <= v <= 1.0):
            problems.append(f"[features]: {name} must be a fraction in [0, 1]")
    if feat.one_hot_max_cardinality <= 0:
        problems.append("[features]: one_hot_max_cardinality must be positive")
    if feat.nld_min_avg_tokens <= 0:
        problems.append("[features]: nld_min_avg_tokens must be positive")
    if feat.epochs < 0 or feat.batch_size <= 0 or feat.negatives_per_positive <= 0:
        problems.append("[features]: epochs must be >= 0, batch_size and negatives_per_positive positive")
    if feat.encoder_sidecar and base_dir is not None and not Path(feat.encoder_sidecar).is_absolute():
        feat.encoder_sidecar = str(base_dir / feat.encoder_sidecar)

    nodes: dict[str, NodeTypeConfig] = {}
    for name, body in raw.get("node", {}).items():
        if not isinstance(body, dict):
            problems.append(f"[node.{name}]: expected a section")
            continue
        body = dict(body)
        class_iri = body.pop("class", body.pop("class_iri", ""))
        node = _coerce(NodeTypeConfig, body, f"[node.{name}]", problems, name=name, class_iri=class_iri)
        if node is None:
            continue
        if not node.class_iri:
            problems.append(f"[node.{name}]: missing 'class'")
        nodes[name] = node

    edges: dict[str, EdgeTypeConfig] = {}
    for name, body in raw.get("edge", {}).items():
        if not isinstance(body, dict):
            problems.append(f"[edge.{name}]: expected a section")
            continue
        edge = _coerce(EdgeTypeConfig, dict(body), f"[edge.{name}]", problems,
                       name=name, kind=body.get("kind", ""),
                       subject_node=body.get("subject_node", ""), object_node=body.get("object_node", ""))
        if edge is None:
            continue
        _validate_edge(edge, nodes, problems)
        edges[name] = edge

    if not nodes:
        problems.append("config declares no node types")

    if problems:
        raise ValidationError(problems)
    return ValidatedConfig(input=input_cfg, output=output_cfg, features=feat, nodes=nodes, edges=edges)


_KIND_FIELDS = {
    "binary": {"properties"},
    "nary": {"aux_class_iri", "subject_to_aux_property", "aux_to_object_property", "feature_properties"},
    "multihop": {"path"},
    "custom": {"query", "select"},
}
_ALL_KIND_FIELDS = set().union(*_KIND_FIELDS.values())


def _validate_edge(edge: EdgeTypeConfig, nodes: dict, problems: list[str]):
    ctx = f"[edge.{edge.name}]"
    if edge.kind not in EDGE_KINDS:
        problems.append(f"{ctx}: kind must be one of {EDGE_KINDS}, got {edge.kind!r}")
        return
    for ref, label in ((edge.subject_node, "subject_node"), (edge.object_node, "object_node")):
        if not ref:
            problems.append(f"{ctx}: missing {label}")
        elif ref not in nodes:
            problems.append(f"{ctx}: {label} references undeclared node type {ref!r}")
    own = _KIND_FIELDS[edge.kind]
    for fname in _ALL_KIND_FIELDS - own:
        value = getattr(edge, fname)
        if value:
            problems.append(f"{ctx}: {fname!r} is not valid for kind {edge.kind!r}")
    if edge.kind == "binary" and not edge.properties:
        problems.append(f"{ctx}: binary edge needs a non-empty 'properties' list")
    if edge.kind == "nary":
        for fname in ("aux_class_iri", "subject_to_aux_property", "aux_to_object_property"):
            if not getattr(edge, fname):
                problems.append(f"{ctx}: n-ary edge needs {fname!r}")
    if edge.kind == "multihop" and len(edge.path) < 2:
        problems.append(f"{ctx}: multihop path needs at least 2 properties")
    if edge.kind == "custom":
        if not edge.query:
            problems.append(f"{ctx}: custom edge needs 'query'")
        if len(edge.select) != 2:
            problems.append(f"{ctx}: custom edge needs select = [src_var, dst_var]")


def load_config(path=None) -> ValidatedConfig:
    """Load and validate a config file.

    Falls back to the RDF2GML_CONFIG environment variable when no path is
    given. Relative input/output paths resolve against the config file's
    directory.
    """
    if path is None:
        path = os.environ.get("RDF2GML_CONFIG")
        if not path:
            raise ConfigParseError("no config path given and RDF2GML_CONFIG is not set")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    raw = parse_toml_subset(text)
    cfg = validate(raw, base_dir=path.resolve().parent)
    cfg.source_path = str(path)
    return cfg


# --- serialization ----------------------------------------------------------


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    s = str(v).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def serialize_config(cfg: ValidatedConfig) -> str:
    """Normalized config text; load(serialize(load(f))) == load(f)."""
    out = []

    def emit(header: str, obj, skip_defaults=None):
        out.append(f"[{header}]")
        for f in fields(obj):
            if f.name in ("name",):
                continue
            value = getattr(obj, f.name)
            if value is None or (skip_defaults and value == skip_defaults.get(f.name)):
                continue
            key = "class" if f.name == "class_iri" and header.startswith("node.") else f.name
            out.append(f"{key} = {_format_value(value)}")
        out.append("")

    emit("input", cfg.input)
    emit("output", cfg.output)
    emit("features", cfg.features)
    for node in cfg.nodes.values():
        emit(f"node.{node.name}", node, skip_defaults={"nld_properties": [], "excluded_properties": [], "include_blank_nodes": False})
    for edge in cfg.edges.values():
        out.append(f"[edge.{edge.name}]")
        out.append(f"kind = {_format_value(edge.kind)}")
        out.append(f"subject_node = {_format_value(edge.subject_node)}")
        out.append(f"object_node = {_format_value(edge.object_node)}")
        for fname in sorted(_KIND_FIELDS[edge.kind]):
            value = getattr(edge, fname)
            if value:
                out.append(f"{fname} = {_format_value(value)}")
        out.append("")
    return "\n".join(out)
