"""In-memory triple store with SPO/POS/OSP indexes for pattern lookups."""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterator, Sequence

from .terms import Term, Triple


class TripleStore:
    """Append-then-finalize store over dictionary-encoded triples.

    Terms are interned to dense integer ids in first-seen order. Triples are
    kept with set semantics. After ``finalize()`` the store is immutable and
    exposes index-backed pattern matching; all downstream modules treat it
    as read-only.
    """

    def __init__(self):
        self._terms: list[Term] = []
        self._ids: dict[Term, int] = {}
        self._triple_set: set[tuple[int, int, int]] = set()
        self._spo: list[tuple[int, int, int]] = []
        self._pos: list[tuple[int, int, int]] = []
        self._osp: list[tuple[int, int, int]] = []
        self._finalized = False

    def __len__(self) -> int:
        return len(self._triple_set)

    @property
    def finalized(self) -> bool:
        return self._finalized

    def intern(self, term: Term) -> int:
        tid = self._ids.get(term)
        if tid is None:
            if self._finalized:
                raise RuntimeError("store is finalized")
            tid = len(self._terms)
            self._terms.append(term)
            self._ids[term] = tid
        return tid

    def term(self, tid: int) -> Term:
        return self._terms[tid]

    def term_id(self, term: Term) -> int | None:
        return self._ids.get(term)

    def add(self, triple: Triple) -> bool:
        """Insert one triple; returns False when it was already present."""
        if self._finalized:
            raise RuntimeError("store is finalized")
        key = (self.intern(triple.subject), self.intern(triple.predicate), self.intern(triple.object))
        if key in self._triple_set:
            return False
        self._triple_set.add(key)
        return True

    def finalize(self) -> "TripleStore":
        if not self._finalized:
            self._spo = sorted(self._triple_set)
            self._pos = sorted((p, o, s) for s, p, o in self._triple_set)
            self._osp = sorted((o, s, p) for s, p, o in self._triple_set)
            self._finalized = True
        return self

    def _decode(self, s: int, p: int, o: int) -> Triple:
        return Triple(self._terms[s], self._terms[p], self._terms[o])

    def triples(self) -> Iterator[Triple]:
        """All triples in ascending SPO term-id order."""
        self._require_finalized()
        for s, p, o in self._spo:
            yield self._decode(s, p, o)

    def _require_finalized(self):
        if not self._finalized:
            raise RuntimeError("store must be finalized before queries")

    @staticmethod
    def _range(index: list, prefix: tuple) -> Sequence[tuple[int, int, int]]:
        lo = bisect_left(index, prefix)
        upper = prefix[:-1] + (prefix[-1] + 1,)
        hi = bisect_left(index, upper)
        return index[lo:hi]

    def match(self, s: Term | None = None, p: Term | None = None, o: Term | None = None) -> list[Triple]:
        """Triples matching every bound position.

        The index is chosen by which positions are bound; results come back
        in ascending term-id order of that index. A term that was never seen
        matches nothing.
        """
        self._require_finalized()
        sid = pid = oid = None
        if s is not None:
            sid = self._ids.get(s)
            if sid is None:
                return []
        if p is not None:
            pid = self._ids.get(p)
            if pid is None:
                return []
        if o is not None:
            oid = self._ids.get(o)
            if oid is None:
                return []

        if sid is not None and pid is not None and oid is not None:
            key = (sid, pid, oid)
            return [self._decode(*key)] if key in self._triple_set else []
        if sid is not None and pid is not None:
            return [self._decode(a, b, c) for a, b, c in self._range(self._spo, (sid, pid))]
        if sid is not None and oid is not None:
            return [self._decode(b, c, a) for a, b, c in self._range(self._osp, (oid, sid))]
        if pid is not None and oid is not None:
            return [self._decode(c, a, b) for a, b, c in self._range(self._pos, (pid, oid))]
        if sid is not None:
            return [self._decode(a, b, c) for a, b, c in self._range(self._spo, (sid,))]
        if pid is not None:
            return [self._decode(c, a, b) for a, b, c in self._range(self._pos, (pid,))]
        if oid is not None:
            return [self._decode(b, c, a) for a, b, c in self._range(self._osp, (oid,))]
        return [self._decode(a, b, c) for a, b, c in self._spo]

    def objects_of(self, subject: Term, predicate: Term) -> list[Term]:
        return [t.object for t in self.match(s=subject, p=predicate)]

    def subjects_of(self, predicate: Term, obj: Term) -> list[Term]:
        return [t.subject for t in self.match(p=predicate, o=obj)]

    def index_sizes(self) -> tuple[int, int, int]:
        self._require_finalized()
        return len(self._spo), len(self._pos), len(self._osp)

    def serialize(self) -> str:
        """Canonical N-Triples text (SPO index order)."""
        self._require_finalized()
        return "".join(t.n3() + "\n" for t in self.triples())
