"""RDF term and triple model."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

XSD_STRING = XSD + "string"
XSD_BOOLEAN = XSD + "boolean"
XSD_DATE = XSD + "date"
XSD_DATETIME = XSD + "dateTime"
XSD_GYEAR = XSD + "gYear"

# Datatypes whose lexical forms are treated as plain numbers.
XSD_NUMERIC = frozenset(
    XSD + local
    for local in (
        "integer", "int", "long", "short", "byte", "decimal", "float", "double",
        "nonNegativeInteger", "positiveInteger", "nonPositiveInteger",
        "negativeInteger", "unsignedLong", "unsignedInt", "unsignedShort",
        "unsignedByte",
    )
)


class TermKind(Enum):
    IRI = "iri"
    LITERAL = "literal"
    BLANK = "blank"


@dataclass(frozen=True, slots=True)
class Term:
    """One RDF term: an IRI, a literal, or a blank node.

    `value` holds the IRI, the blank-node id (without the `_:` prefix), or
    the literal lexical form depending on `kind`. A literal carries at most
    one of `datatype` / `lang`.
    """

    kind: TermKind
    value: str
    datatype: str | None = None
    lang: str | None = None

    def __post_init__(self):
        if self.kind is not TermKind.LITERAL and (self.datatype or self.lang):
            raise ValueError("datatype/lang only allowed on literals")
        if self.datatype and self.lang:
            raise ValueError("datatype and language tag are mutually exclusive")
        if self.kind is TermKind.IRI and not self.value:
            raise ValueError("empty IRI")

    @classmethod
    def iri(cls, value: str) -> "Term":
        return cls(TermKind.IRI, value)

    @classmethod
    def literal(cls, lexical: str, datatype: str | None = None, lang: str | None = None) -> "Term":
        return cls(TermKind.LITERAL, lexical, datatype, lang)

    @classmethod
    def blank(cls, node_id: str) -> "Term":
        return cls(TermKind.BLANK, node_id)

    @property
    def is_literal(self) -> bool:
        return self.kind is TermKind.LITERAL

    def n3(self) -> str:
        """Serialize in N-Triples syntax."""
        if self.kind is TermKind.IRI:
            return f"<{_escape_iri(self.value)}>"
        if self.kind is TermKind.BLANK:
            return f"_:{self.value}"
        lex = _escape_literal(self.value)
        if self.lang:
            return f'"{lex}"@{self.lang}'
        if self.datatype:
            return f'"{lex}"^^<{_escape_iri(self.datatype)}>'
        return f'"{lex}"'

    def sort_key(self) -> str:
        """Stable text key used for lexicographic id assignment."""
        if self.kind is TermKind.BLANK:
            return "_:" + self.value
        return self.value


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if self.predicate.kind is not TermKind.IRI:
            raise ValueError("predicate must be an IRI")
        if self.subject.kind is TermKind.LITERAL:
            raise ValueError("subject must not be a literal")

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


def _escape_literal(s: str) -> str:
    out = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    return "".join(out)


def _escape_iri(s: str) -> str:
    return "".join(f"\\u{ord(c):04X}" if c in '<>"{}|^`\\' or ord(c) <= 0x20 else c for c in s)
