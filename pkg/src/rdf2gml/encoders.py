"""Text encoders for natural-language description (NLD) columns.

The default is a self-contained feature-hashing scheme; external encoders
plug in through a sidecar file of precomputed vectors keyed by node IRI, or
through a line-oriented subprocess protocol (one text in, one vector out).
"""

from __future__ import annotations

import hashlib
import shlex
import subprocess
from pathlib import Path

import numpy as np

from .errors import EncoderFailure


class HashingTextEncoder:
    """Deterministic bag-of-tokens hashing encoder.

    Scheme: lowercase, split on whitespace; each token is hashed with
    BLAKE2b (9-byte digest); the first 8 bytes (little-endian) modulo `dim`
    pick the bucket and the low bit of the 9th byte picks the sign; signed
    counts are accumulated and the vector is L2-normalized. Empty or missing
    text yields the zero vector.
    """

    name = "hashing"

    def __init__(self, dim: int):
        if dim <= 0:
            raise EncoderFailure("encoder dim must be positive")
        self.dim = dim

    def encode(self, text: str | None) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        if not text:
            return vec
        for token in text.lower().split():
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9).digest()
            bucket = int.from_bytes(digest[:8], "little") % self.dim
            sign = 1.0 if digest[8] & 1 == 0 else -1.0
            vec[bucket] += sign
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec

    def encode_nodes(self, iris, texts) -> np.ndarray:
        return np.vstack([self.encode(t) for t in texts]) if len(texts) else np.zeros((0, self.dim))


class SidecarEncoder:
    """Precomputed embeddings from a TSV file: `<node IRI>\\t<v0> <v1> ...`."""

    name = "sidecar"

    def __init__(self, path, dim: int):
        self.dim = dim
        self.vectors: dict[str, np.ndarray] = {}
        self.warnings: list[str] = []
        path = Path(path)
        if not path.exists():
            raise EncoderFailure(f"sidecar file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                iri, _, rest = line.partition("\t")
                if not rest:
                    raise EncoderFailure(f"{path}:{lineno}: expected '<iri>\\t<values>'")
                values = np.array([float(x) for x in rest.split()], dtype=np.float64)
                if values.shape[0] != dim:
                    raise EncoderFailure(f"{path}:{lineno}: expected {dim} values, got {values.shape[0]}")
                self.vectors[iri] = values

    def encode_nodes(self, iris, texts) -> np.ndarray:
        out = np.zeros((len(iris), self.dim), dtype=np.float64)
        for row, iri in enumerate(iris):
            vec = self.vectors.get(iri)
            if vec is None:
                self.warnings.append(f"no sidecar embedding for <{iri}>; using zero vector")
            else:
                out[row] = vec
        return out


class SubprocessEncoder:
    """Pipes texts to an external command, one per line; reads one vector per line.

    Newlines inside a text are flattened to spaces before sending.
    """

    name = "subprocess"

    def __init__(self, command: str, dim: int):
        self.command = command
        self.dim = dim

    def encode_nodes(self, iris, texts) -> np.ndarray:
        payload = "\n".join((t or "").replace("\n", " ").replace("\r", " ") for t in texts)
        try:
            proc = subprocess.run(
                shlex.split(self.command), input=payload + "\n",
                capture_output=True, text=True, check=True,
            )
        except (OSError, subprocess.CalledProcessError) as exc:
            raise EncoderFailure(f"encoder command failed: {exc}") from exc
        rows = [line for line in proc.stdout.splitlines() if line.strip()]
        if len(rows) != len(texts):
            raise EncoderFailure(f"encoder returned {len(rows)} vectors for {len(texts)} texts")
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, row in enumerate(rows):
            values = [float(x) for x in row.split()]
            if len(values) != self.dim:
                raise EncoderFailure(f"encoder line {i + 1}: expected {self.dim} values, got {len(values)}")
            out[i] = values
        return out


def make_encoder(feature_cfg):
    """Build the encoder selected by the feature config."""
    if feature_cfg.text_encoder == "hashing":
        return HashingTextEncoder(feature_cfg.embedding_dim)
    if feature_cfg.encoder_sidecar:
        return SidecarEncoder(feature_cfg.encoder_sidecar, feature_cfg.embedding_dim)
    if feature_cfg.encoder_command:
        return SubprocessEncoder(feature_cfg.encoder_command, feature_cfg.embedding_dim)
    raise EncoderFailure("external text encoder requested but no sidecar/command configured")
