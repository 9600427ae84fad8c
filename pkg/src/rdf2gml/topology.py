"""Topology-based node features via knowledge-graph embeddings.

Trains one of four scoring models (translation, bilinear, complex bilinear,
complex rotation) over every non-literal-object triple in the store with
plain SGD, then exports per-node-type feature matrices. Ranking evaluation
(MRR / Hits@k, raw setting) supports model comparison.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .content import FeatureMatrix
from .errors import DivergenceError, EmptyGraph, ShapeMismatch
from .nodes import NodeTable
from .store import TripleStore
from .terms import TermKind

MODELS = ("transe", "distmult", "complex", "rotate")
_MARGIN_MODELS = ("transe", "rotate")


@dataclass
class Hyper:
    model: str = "transe"
    dim: int = 128
    learning_rate: float = 0.01
    margin: float = 1.0
    negatives: int = 1
    epochs: int = 100
    batch_size: int = 512
    seed: int = 0
    workers: int = 1


@dataclass
class TripleIdSet:
    entities: list[str]                 # term sort keys, lexicographic
    relations: list[str]
    triples: np.ndarray                 # (n, 3) int64 rows (head, relation, tail)
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    entity_index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.entity_index:
            self.entity_index = {e: i for i, e in enumerate(self.entities)}


@dataclass
class EmbeddingModel:
    model: str
    dim: int
    entities: np.ndarray                # (E, dim) float64
    relations: np.ndarray               # (R, dim) or (R, dim/2) phases for rotate
    hyper: Hyper
    loss_history: list[float] = field(default_factory=list)


def build_triple_ids(store: TripleStore, seed: int = 0, fractions=(0.9, 0.05, 0.05)) -> TripleIdSet:
    """Id-encode every object-property triple (literal objects excluded).

    The whole graph is used, not only configured classes. Ids are assigned
    lexicographically; the split is a seeded shuffle.
    """
    ent_keys: set[str] = set()
    rel_keys: set[str] = set()
    rows: list[tuple[str, str, str]] = []
    for triple in store.triples():
        if triple.object.kind is TermKind.LITERAL:
            continue
        h = triple.subject.sort_key()
        t = triple.object.sort_key()
        r = triple.predicate.value
        ent_keys.add(h)
        ent_keys.add(t)
        rel_keys.add(r)
        rows.append((h, r, t))
    if not rows:
        raise EmptyGraph("no object-property triples in the dump")
    entities = sorted(ent_keys)
    relations = sorted(rel_keys)
    e_idx = {e: i for i, e in enumerate(entities)}
    r_idx = {r: i for i, r in enumerate(relations)}
    triples = np.array(sorted((e_idx[h], r_idx[r], e_idx[t]) for h, r, t in rows), dtype=np.int64)

    n = len(triples)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_valid = int(n * fractions[1])
    n_test = int(n * fractions[2])
    test = np.sort(perm[:n_test])
    valid = np.sort(perm[n_test : n_test + n_valid])
    train = np.sort(perm[n_test + n_valid :])
    return TripleIdSet(entities, relations, triples, train, valid, test)


# --- scoring ---------------------------------------------------------------


def _split_complex(M: np.ndarray):
    m = M.shape[1] // 2
    return M[:, :m] + 1j * M[:, m:]


def _pack_complex(C: np.ndarray) -> np.ndarray:
    return np.concatenate([C.real, C.imag], axis=1)


def _transe_sg(H, R, T):
    d = H + R - T
    norm = np.linalg.norm(d, axis=1)
    safe = np.where(norm > 0, norm, 1.0)
    u = d / safe[:, None]
    return -norm, -u, -u, u


def _distmult_sg(H, R, T):
    return (H * R * T).sum(axis=1), R * T, H * T, H * R


def _complex_sg(H, R, T):
    h, r, t = _split_complex(H), _split_complex(R), _split_complex(T)
    s = (h * r * np.conj(t)).real.sum(axis=1)
    gh = np.conj(r) * t
    gr = np.conj(h) * t
    gt = h * r
    return s, _pack_complex(gh), _pack_complex(gr), _pack_complex(gt)


def _rotate_sg(H, Theta, T):
    h, t = _split_complex(H), _split_complex(T)
    w = np.exp(1j * Theta)
    d = h * w - t
    norm = np.sqrt((d.real**2 + d.imag**2).sum(axis=1))
    safe = np.where(norm > 0, norm, 1.0)
    g = d / safe[:, None]
    gh = -(g * np.conj(w))
    gt = g
    gtheta = -(np.conj(g) * (1j * h * w)).real
    return -norm, _pack_complex(gh), gtheta, _pack_complex(gt)


_SCORE_GRAD = {"transe": _transe_sg, "distmult": _distmult_sg, "complex": _complex_sg, "rotate": _rotate_sg}


def relation_width(model: str, dim: int) -> int:
    return dim // 2 if model == "rotate" else dim


def score_batch(model: str, H: np.ndarray, R: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Plausibility scores (higher is better) for row-aligned vector triples."""
    return _SCORE_GRAD[model](H, R, T)[0]


def score_triple(emb: EmbeddingModel, h: int, r: int, t: int) -> float:
    return float(
        score_batch(emb.model, emb.entities[[h]], emb.relations[[r]], emb.entities[[t]])[0]
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def pair_loss_and_grads(model: str, margin: float, pos_vecs, neg_vecs):
    """Per-example loss and gradients for (positive, negative) vector batches.

    Margin ranking loss for the distance models, logistic loss for the
    bilinear ones. Returns (loss array, grads for Hp, Rp, Tp, Hn, Rn, Tn).
    """
    Hp, Rp, Tp = pos_vecs
    Hn, Rn, Tn = neg_vecs
    sg = _SCORE_GRAD[model]
    sp, ghp, grp, gtp = sg(Hp, Rp, Tp)
    sn, ghn, grn, gtn = sg(Hn, Rn, Tn)
    if model in _MARGIN_MODELS:
        loss = np.maximum(0.0, margin - sp + sn)
        active = (loss > 0).astype(np.float64)[:, None]
        return loss, -ghp * active, -grp * active, -gtp * active, ghn * active, grn * active, gtn * active
    loss = _softplus(-sp) + _softplus(sn)
    wp = -_sigmoid(-sp)[:, None]
    wn = _sigmoid(sn)[:, None]
    return loss, ghp * wp, grp * wp, gtp * wp, ghn * wn, grn * wn, gtn * wn


# --- training ----------------------------------------------------------------


def init_model(n_entities: int, n_relations: int, hyper: Hyper) -> EmbeddingModel:
    if hyper.model not in MODELS:
        raise ValueError(f"unknown embedding model {hyper.model!r}")
    if hyper.model in ("complex", "rotate") and hyper.dim % 2:
        raise ValueError(f"{hyper.model} needs an even dimension")
    rng = np.random.default_rng(hyper.seed)
    bound = 6.0 / np.sqrt(hyper.dim)
    entities = rng.uniform(-bound, bound, size=(n_entities, hyper.dim))
    relations = rng.uniform(-bound, bound, size=(n_relations, relation_width(hyper.model, hyper.dim)))
    return EmbeddingModel(hyper.model, hyper.dim, entities, relations, hyper)


def _corrupt(pos: np.ndarray, n_entities: int, rng: np.random.Generator) -> np.ndarray:
    neg = pos.copy()
    flip = rng.integers(0, 2, size=len(pos))
    ids = rng.integers(0, n_entities, size=len(pos))
    neg[flip == 0, 0] = ids[flip == 0]
    neg[flip == 1, 2] = ids[flip == 1]
    return neg


def _run_batch(emb: EmbeddingModel, pos: np.ndarray, n_entities: int, rng, lr: float, negatives: int) -> float:
    if negatives > 1:
        pos = np.repeat(pos, negatives, axis=0)
    neg = _corrupt(pos, n_entities, rng)
    E, W = emb.entities, emb.relations
    loss, ghp, grp, gtp, ghn, grn, gtn = pair_loss_and_grads(
        emb.model,
        emb.hyper.margin,
        (E[pos[:, 0]], W[pos[:, 1]], E[pos[:, 2]]),
        (E[neg[:, 0]], W[neg[:, 1]], E[neg[:, 2]]),
    )
    step = lr / len(pos)
    np.add.at(E, pos[:, 0], -step * ghp)
    np.add.at(W, pos[:, 1], -step * grp)
    np.add.at(E, pos[:, 2], -step * gtp)
    np.add.at(E, neg[:, 0], -step * ghn)
    np.add.at(W, neg[:, 1], -step * grn)
    np.add.at(E, neg[:, 2], -step * gtn)
    return float(loss.sum())


def train(idset: TripleIdSet, hyper: Hyper) -> EmbeddingModel:
    """SGD training over the train split; per-epoch mean loss is recorded.

    Single worker is bit-deterministic for a fixed seed. With workers > 1,
    batches are sharded across threads with unsynchronized updates, which
    forfeits determinism (documented contract).
    """
    if len(idset.train) == 0:
        raise EmptyGraph("train split is empty")
    emb = init_model(len(idset.entities), len(idset.relations), hyper)
    train_triples = idset.triples[idset.train]
    n_entities = len(idset.entities)
    rng = np.random.default_rng(hyper.seed + 1)
    for _ in range(hyper.epochs):
        order = rng.permutation(len(train_triples))
        batches = [
            train_triples[order[i : i + hyper.batch_size]]
            for i in range(0, len(order), hyper.batch_size)
        ]
        if hyper.workers > 1:
            seeds = rng.integers(0, 2**63 - 1, size=len(batches))
            with ThreadPoolExecutor(max_workers=hyper.workers) as pool:
                totals = list(
                    pool.map(
                        lambda bs: _run_batch(
                            emb, bs[0], n_entities, np.random.default_rng(int(bs[1])),
                            hyper.learning_rate, hyper.negatives,
                        ),
                        zip(batches, seeds),
                    )
                )
            total = sum(totals)
        else:
            total = 0.0
            for batch in batches:
                total += _run_batch(emb, batch, n_entities, rng, hyper.learning_rate, hyper.negatives)
        mean_loss = total / (len(train_triples) * hyper.negatives)
        if not np.isfinite(mean_loss) or not np.isfinite(emb.entities).all():
            raise DivergenceError(f"non-finite loss/weights at epoch {len(emb.loss_history) + 1}")
        emb.loss_history.append(mean_loss)
        if emb.model == "transe":
            norms = np.linalg.norm(emb.entities, axis=1)
            over = norms > 1.0
            if over.any():
                emb.entities[over] /= norms[over, None]
    return emb


# --- evaluation ---------------------------------------------------------------


def _all_tail_scores(emb: EmbeddingModel, h: int, r: int) -> np.ndarray:
    E, W = emb.entities, emb.relations
    if emb.model == "transe":
        return -np.linalg.norm((E[h] + W[r])[None, :] - E, axis=1)
    if emb.model == "distmult":
        return E @ (E[h] * W[r])
    if emb.model == "complex":
        m = emb.dim // 2
        hq = (E[h, :m] + 1j * E[h, m:]) * (W[r, :m] + 1j * W[r, m:])
        return E[:, :m] @ hq.real + E[:, m:] @ hq.imag
    m = emb.dim // 2
    hw = (E[h, :m] + 1j * E[h, m:]) * np.exp(1j * W[r])
    d = hw[None, :] - (E[:, :m] + 1j * E[:, m:])
    return -np.sqrt((d.real**2 + d.imag**2).sum(axis=1))


def _all_head_scores(emb: EmbeddingModel, r: int, t: int) -> np.ndarray:
    E, W = emb.entities, emb.relations
    if emb.model == "transe":
        return -np.linalg.norm(E + (W[r] - E[t])[None, :], axis=1)
    if emb.model == "distmult":
        return E @ (W[r] * E[t])
    if emb.model == "complex":
        m = emb.dim // 2
        q = (W[r, :m] + 1j * W[r, m:]) * np.conj(E[t, :m] + 1j * E[t, m:])
        return E[:, :m] @ q.real - E[:, m:] @ q.imag
    m = emb.dim // 2
    w = np.exp(1j * W[r])
    d = (E[:, :m] + 1j * E[:, m:]) * w[None, :] - (E[t, :m] + 1j * E[t, m:])[None, :]
    return -np.sqrt((d.real**2 + d.imag**2).sum(axis=1))


def _rank_of(scores: np.ndarray, true_id: int) -> int:
    """Raw rank, ties broken in corrupted-id order."""
    s = scores[true_id]
    better = int((scores > s).sum())
    tied_before = int((scores[:true_id] == s).sum())
    return 1 + better + tied_before


def evaluate(emb: EmbeddingModel, idset: TripleIdSet, split: str = "test") -> dict:
    """Raw MRR / Hits@1 / Hits@10 averaged over head and tail prediction."""
    index = {"train": idset.train, "valid": idset.valid, "test": idset.test, "all": np.arange(len(idset.triples))}[split]
    ranks: list[int] = []
    for h, r, t in idset.triples[index]:
        ranks.append(_rank_of(_all_tail_scores(emb, h, r), t))
        ranks.append(_rank_of(_all_head_scores(emb, r, t), h))
    if not ranks:
        return {"mrr": 0.0, "hits1": 0.0, "hits10": 0.0, "ranked": 0}
    arr = np.array(ranks, dtype=np.float64)
    return {
        "mrr": float((1.0 / arr).mean()),
        "hits1": float((arr <= 1).mean()),
        "hits10": float((arr <= 10).mean()),
        "ranked": len(ranks),
    }


# --- export -------------------------------------------------------------------


def export_node_embeddings(
    emb: EmbeddingModel, idset: TripleIdSet, tables: dict[str, NodeTable]
) -> tuple[dict[str, FeatureMatrix], list[str]]:
    """Per-node-type matrices in node-id order; isolated nodes get zeros."""
    out: dict[str, FeatureMatrix] = {}
    warnings: list[str] = []
    for name, table in tables.items():
        data = np.zeros((len(table), emb.dim), dtype=np.float64)
        for row, key in enumerate(table.entries):
            ent = idset.entity_index.get(key)
            if ent is None:
                warnings.append(f"node <{key}> of type {name!r} has no object-property triples; zero vector")
            else:
                data[row] = emb.entities[ent]
        out[name] = FeatureMatrix(name, [("topology", 0, emb.dim)], data)
    return out, warnings


# --- checkpoint ----------------------------------------------------------------

_MAGIC = b"GMLEMB01"
_MODEL_CODE = {name: i for i, name in enumerate(MODELS)}


def write_checkpoint(path, emb: EmbeddingModel):
    """Binary layout: magic, model u8, dim u32, counts u64, seed i64, f32 rows."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BIQQq", _MODEL_CODE[emb.model], emb.dim,
                             emb.entities.shape[0], emb.relations.shape[0], emb.hyper.seed))
        fh.write(emb.entities.astype("<f4").tobytes(order="C"))
        fh.write(emb.relations.astype("<f4").tobytes(order="C"))


def read_checkpoint(path) -> EmbeddingModel:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] != _MAGIC:
        raise ShapeMismatch(f"{path}: bad magic")
    code, dim, n_ent, n_rel, seed = struct.unpack_from("<BIQQq", raw, 8)
    model = MODELS[code]
    off = 8 + struct.calcsize("<BIQQq")
    rel_w = relation_width(model, dim)
    ents = np.frombuffer(raw, dtype="<f4", count=n_ent * dim, offset=off).reshape(n_ent, dim).astype(np.float64)
    off += n_ent * dim * 4
    rels = np.frombuffer(raw, dtype="<f4", count=n_rel * rel_w, offset=off).reshape(n_rel, rel_w).astype(np.float64)
    return EmbeddingModel(model, dim, ents, rels, Hyper(model=model, dim=dim, seed=seed))
