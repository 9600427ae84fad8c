"""Streaming parsers for N-Triples and Turtle dumps.

Both parsers feed a TripleStore one statement at a time. Turtle support
covers the common dump subset: prefix/base directives, `a`, predicate and
object lists, typed and language-tagged literals, numeric/boolean literal
shorthand, and blank node labels. Quoted triples and collections are out.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IoError, RdfSyntaxError, UnsupportedFormat
from .store import TripleStore
from .terms import XSD, Term, Triple

_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass
class ParseIssue:
    line: int
    message: str


@dataclass
class ParseResult:
    store: TripleStore
    issues: list[ParseIssue] = field(default_factory=list)


class _BlankNodes:
    """Renames input blank-node labels to stable ids b0, b1, ... in first-seen order."""

    def __init__(self):
        self._map: dict[str, str] = {}

    def resolve(self, label: str) -> Term:
        name = self._map.get(label)
        if name is None:
            name = f"b{len(self._map)}"
            self._map[label] = name
        return Term.blank(name)


def _unescape(text: str, line: int, allow_echar: bool) -> str:
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= n:
            raise RdfSyntaxError("dangling escape", line)
        e = text[i + 1]
        if e == "u" or e == "U":
            width = 4 if e == "u" else 8
            hexpart = text[i + 2 : i + 2 + width]
            if len(hexpart) != width:
                raise RdfSyntaxError("truncated unicode escape", line)
            try:
                out.append(chr(int(hexpart, 16)))
            except ValueError:
                raise RdfSyntaxError(f"bad unicode escape \\{e}{hexpart}", line) from None
            i += 2 + width
        elif allow_echar and e in _ECHAR:
            out.append(_ECHAR[e])
            i += 2
        else:
            raise RdfSyntaxError(f"invalid escape \\{e}", line)
    return "".join(out)


class _LineScanner:
    """Cursor over one N-Triples statement."""

    def __init__(self, text: str, line: int):
        self.text = text
        self.pos = 0
        self.line = line

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, msg: str):
        raise RdfSyntaxError(msg, self.line)

    def scan_iri(self) -> str:
        if self.peek() != "<":
            self.error("expected '<'")
        end = self.text.find(">", self.pos + 1)
        if end < 0:
            self.error("unterminated IRI")
        raw = self.text[self.pos + 1 : end]
        if any(c in raw for c in ' "{}|^`') or "<" in raw:
            self.error("illegal character in IRI")
        self.pos = end + 1
        return _unescape(raw, self.line, allow_echar=False)

    def scan_bnode(self) -> str:
        if not self.text.startswith("_:", self.pos):
            self.error("expected blank node")
        i = self.pos + 2
        start = i
        while i < len(self.text) and (self.text[i].isalnum() or self.text[i] in "_-."):
            i += 1
        # trailing '.' belongs to the statement terminator
        while i > start and self.text[i - 1] == ".":
            i -= 1
        if i == start:
            self.error("empty blank node label")
        label = self.text[start:i]
        self.pos = i
        return label

    def scan_literal(self) -> Term:
        if self.peek() != '"':
            self.error("expected literal")
        i = self.pos + 1
        while i < len(self.text):
            if self.text[i] == "\\":
                i += 2
                continue
            if self.text[i] == '"':
                break
            i += 1
        else:
            self.error("unterminated literal")
        if i >= len(self.text):
            self.error("unterminated literal")
        lex = _unescape(self.text[self.pos + 1 : i], self.line, allow_echar=True)
        self.pos = i + 1
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            dt = self.scan_iri()
            return Term.literal(lex, datatype=dt)
        if self.peek() == "@":
            self.pos += 1
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "-"):
                self.pos += 1
            tag = self.text[start : self.pos]
            if not tag:
                self.error("empty language tag")
            return Term.literal(lex, lang=tag)
        return Term.literal(lex)


def parse_ntriples(lines, bnodes: _BlankNodes | None = None, lenient: bool = False) -> ParseResult:
    """Parse an iterable of N-Triples lines into a finalized store."""
    store = TripleStore()
    issues: list[ParseIssue] = []
    bnodes = bnodes or _BlankNodes()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            triple = _parse_statement(line, lineno, bnodes)
        except RdfSyntaxError as exc:
            if not lenient:
                raise
            issues.append(ParseIssue(lineno, str(exc)))
            continue
        store.add(triple)
    store.finalize()
    return ParseResult(store, issues)


def _parse_statement(line: str, lineno: int, bnodes: _BlankNodes) -> Triple:
    sc = _LineScanner(line, lineno)
    sc.skip_ws()
    if sc.peek() == "<":
        subject = Term.iri(sc.scan_iri())
    elif sc.text.startswith("_:", sc.pos):
        subject = bnodes.resolve(sc.scan_bnode())
    else:
        sc.error("subject must be an IRI or blank node")
    sc.skip_ws()
    predicate = Term.iri(sc.scan_iri())
    sc.skip_ws()
    if sc.peek() == "<":
        obj: Term = Term.iri(sc.scan_iri())
    elif sc.text.startswith("_:", sc.pos):
        obj = bnodes.resolve(sc.scan_bnode())
    elif sc.peek() == '"':
        obj = sc.scan_literal()
    else:
        sc.error("object must be an IRI, blank node, or literal")
    sc.skip_ws()
    if sc.peek() != ".":
        sc.error("missing statement terminator '.'")
    sc.pos += 1
    sc.skip_ws()
    if not sc.at_end() and sc.peek() != "#":
        sc.error("trailing content after '.'")
    return Triple(subject, predicate, obj)


# --- Turtle ---------------------------------------------------------------

_PN_LOCAL_EXTRA = "_-.%"


class _TurtleLexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1

    def error(self, msg: str):
        raise RdfSyntaxError(msg, self.line)

    def _advance(self, n: int):
        self.line += self.text.count("\n", self.pos, self.pos + n)
        self.pos += n

    def _skip_ws_comments(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self._advance(1)
            elif ch == "#":
                nl = self.text.find("\n", self.pos)
                self._advance((nl - self.pos) if nl >= 0 else len(self.text) - self.pos)
            else:
                return

    def tokens(self):
        """Yields (kind, value, line) until EOF."""
        while True:
            self._skip_ws_comments()
            if self.pos >= len(self.text):
                return
            line = self.line
            ch = self.text[self.pos]
            if ch == "<":
                end = self.text.find(">", self.pos + 1)
                if end < 0:
                    self.error("unterminated IRI")
                raw = self.text[self.pos + 1 : end]
                self._advance(end + 1 - self.pos)
                yield ("iri", _unescape(raw, line, allow_echar=False), line)
            elif ch in "\"'":
                yield ("string", self._scan_string(ch), line)
            elif self.text.startswith("^^", self.pos):
                self._advance(2)
                yield ("dtype", "^^", line)
            elif ch == "@":
                self._advance(1)
                word = self._scan_word()
                if word in ("prefix", "base"):
                    yield ("directive", word, line)
                else:
                    yield ("langtag", word, line)
            elif ch in ".;,[]":
                self._advance(1)
                yield (ch, ch, line)
            elif self.text.startswith("_:", self.pos):
                self._advance(2)
                label = self._scan_word(extra="_-.")
                while label.endswith("."):
                    label = label[:-1]
                    self.pos -= 1
                if not label:
                    self.error("empty blank node label")
                yield ("bnode", label, line)
            elif ch.isdigit() or (ch in "+-" and self.pos + 1 < len(self.text) and self.text[self.pos + 1].isdigit()):
                yield ("number", self._scan_number(), line)
            else:
                word = self._scan_word(extra="_-.:%")
                if not word:
                    self.error(f"unexpected character {ch!r}")
                if word == "a":
                    yield ("a", "a", line)
                elif word in ("true", "false"):
                    yield ("boolean", word, line)
                elif word in ("PREFIX", "BASE"):
                    yield ("sparql_directive", word.lower(), line)
                elif ":" in word:
                    while word.endswith("."):
                        word = word[:-1]
                        self.pos -= 1
                    yield ("pname", word, line)
                else:
                    self.error(f"unexpected token {word!r}")

    def _scan_word(self, extra: str = "") -> str:
        start = self.pos
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c.isalnum() or c in extra:
                self.pos += 1
            else:
                break
        return self.text[start : self.pos]

    def _scan_number(self) -> str:
        start = self.pos
        if self.text[self.pos] in "+-":
            self.pos += 1
        seen_dot = seen_exp = False
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c.isdigit():
                self.pos += 1
            elif c == "." and not seen_dot and not seen_exp and self.pos + 1 < len(self.text) and self.text[self.pos + 1].isdigit():
                seen_dot = True
                self.pos += 1
            elif c in "eE" and not seen_exp:
                seen_exp = True
                self.pos += 1
                if self.pos < len(self.text) and self.text[self.pos] in "+-":
                    self.pos += 1
            else:
                break
        return self.text[start : self.pos]

    def _scan_string(self, quote: str) -> str:
        long_q = quote * 3
        if self.text.startswith(long_q, self.pos):
            end = self.text.find(long_q, self.pos + 3)
            if end < 0:
                self.error("unterminated long string")
            raw = self.text[self.pos + 3 : end]
            line = self.line
            self._advance(end + 3 - self.pos)
            return _unescape(raw, line, allow_echar=True)
        i = self.pos + 1
        while i < len(self.text):
            c = self.text[i]
            if c == "\\":
                i += 2
                continue
            if c == quote:
                break
            if c == "\n":
                self.error("newline in string")
            i += 1
        else:
            self.error("unterminated string")
        raw = self.text[self.pos + 1 : i]
        line = self.line
        self._advance(i + 1 - self.pos)
        return _unescape(raw, line, allow_echar=True)


_NUMERIC_SHORTHAND = {False: XSD + "integer", True: XSD + "decimal"}


class _TurtleParser:
    def __init__(self, text: str, lenient: bool = False):
        self.lexer = _TurtleLexer(text)
        self.toks = list(self.lexer.tokens())
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.base = ""
        self.bnodes = _BlankNodes()
        self.lenient = lenient
        self.issues: list[ParseIssue] = []

    def _peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", "", self.lexer.line)

    def _next(self):
        tok = self._peek()
        self.i += 1
        return tok

    def _expect(self, kind: str):
        tok = self._next()
        if tok[0] != kind:
            raise RdfSyntaxError(f"expected {kind!r}, got {tok[1]!r}", tok[2])
        return tok

    def _resolve_iri(self, value: str) -> str:
        if self.base and ":" not in value.split("/")[0]:
            return self.base + value
        return value

    def _expand_pname(self, pname: str, line: int) -> str:
        prefix, _, local = pname.partition(":")
        if prefix not in self.prefixes:
            raise RdfSyntaxError(f"undefined prefix {prefix!r}", line)
        return self.prefixes[prefix] + local

    def parse(self, store: TripleStore) -> list[ParseIssue]:
        while self._peek()[0] != "eof":
            start = self.i
            try:
                self._statement(store)
            except RdfSyntaxError as exc:
                if not self.lenient:
                    raise
                self.issues.append(ParseIssue(exc.line or self._peek()[2], str(exc)))
                self.i = max(self.i, start + 1)
                while self._peek()[0] not in (".", "eof"):
                    self.i += 1
                if self._peek()[0] == ".":
                    self.i += 1
        return self.issues

    def _statement(self, store: TripleStore):
        kind, value, line = self._peek()
        if kind == "directive" or kind == "sparql_directive":
            self._directive(kind == "directive")
            return
        subject = self._subject()
        self._predicate_object_list(store, subject)
        self._expect(".")

    def _directive(self, needs_dot: bool):
        _, which, _ = self._next()
        if which == "prefix":
            tok = self._expect("pname")
            prefix = tok[1].rstrip(":")
            if ":" in prefix:
                raise RdfSyntaxError("malformed prefix declaration", tok[2])
            iri = self._expect("iri")[1]
            self.prefixes[prefix] = self._resolve_iri(iri)
        else:
            self.base = self._resolve_iri(self._expect("iri")[1])
        if needs_dot:
            self._expect(".")

    def _subject(self) -> Term:
        kind, value, line = self._next()
        if kind == "iri":
            return Term.iri(self._resolve_iri(value))
        if kind == "pname":
            return Term.iri(self._expand_pname(value, line))
        if kind == "bnode":
            return self.bnodes.resolve(value)
        raise RdfSyntaxError(f"bad subject {value!r}", line)

    def _verb(self) -> Term:
        kind, value, line = self._next()
        if kind == "a":
            return Term.iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
        if kind == "iri":
            return Term.iri(self._resolve_iri(value))
        if kind == "pname":
            return Term.iri(self._expand_pname(value, line))
        raise RdfSyntaxError(f"bad predicate {value!r}", line)

    def _object(self) -> Term:
        kind, value, line = self._next()
        if kind == "iri":
            return Term.iri(self._resolve_iri(value))
        if kind == "pname":
            return Term.iri(self._expand_pname(value, line))
        if kind == "bnode":
            return self.bnodes.resolve(value)
        if kind == "boolean":
            return Term.literal(value, datatype=XSD + "boolean")
        if kind == "number":
            if "e" in value.lower():
                return Term.literal(value, datatype=XSD + "double")
            return Term.literal(value, datatype=_NUMERIC_SHORTHAND["." in value])
        if kind == "string":
            nxt = self._peek()
            if nxt[0] == "langtag":
                self._next()
                return Term.literal(value, lang=nxt[1])
            if nxt[0] == "dtype":
                self._next()
                dt_kind, dt_value, dt_line = self._next()
                if dt_kind == "iri":
                    return Term.literal(value, datatype=self._resolve_iri(dt_value))
                if dt_kind == "pname":
                    return Term.literal(value, datatype=self._expand_pname(dt_value, dt_line))
                raise RdfSyntaxError("bad datatype", dt_line)
            return Term.literal(value)
        raise RdfSyntaxError(f"bad object {value!r}", line)

    def _predicate_object_list(self, store: TripleStore, subject: Term):
        while True:
            predicate = self._verb()
            while True:
                store.add(Triple(subject, predicate, self._object()))
                if self._peek()[0] == ",":
                    self._next()
                    continue
                break
            if self._peek()[0] == ";":
                self._next()
                # tolerate trailing ';' before '.'
                if self._peek()[0] in (".", ";"):
                    while self._peek()[0] == ";":
                        self._next()
                    return
                continue
            return


def parse_turtle(text: str, lenient: bool = False) -> ParseResult:
    store = TripleStore()
    parser = _TurtleParser(text, lenient=lenient)
    issues = parser.parse(store)
    store.finalize()
    return ParseResult(store, issues)


# --- entry point ----------------------------------------------------------

_FORMATS = {"ntriples", "turtle"}
_SUFFIXES = {".nt": "ntriples", ".ntriples": "ntriples", ".ttl": "turtle", ".turtle": "turtle"}


def detect_format(path: Path) -> str:
    name = path.name
    if name.endswith(".gz"):
        name = name[: -len(".gz")]
    suffix = Path(name).suffix.lower()
    fmt = _SUFFIXES.get(suffix)
    if fmt is None:
        raise UnsupportedFormat(f"cannot infer RDF format from {path.name!r} (use .nt/.ttl, optionally .gz)")
    return fmt


def parse_dump(path, format: str | None = None, lenient: bool = False) -> ParseResult:
    """Parse one dump file (optionally gzip-compressed) into a finalized store."""
    path = Path(path)
    fmt = format or detect_format(path)
    if fmt not in _FORMATS:
        raise UnsupportedFormat(f"unsupported format {fmt!r}")
    try:
        if path.name.endswith(".gz"):
            fh = gzip.open(path, "rt", encoding="utf-8")
        else:
            fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot open {path}: {exc}") from exc
    with fh:
        try:
            if fmt == "ntriples":
                return parse_ntriples(fh, lenient=lenient)
            return parse_turtle(fh.read(), lenient=lenient)
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc


def parse_text(text: str, format: str = "ntriples", lenient: bool = False) -> ParseResult:
    """Parse RDF from a string; convenient for tests."""
    if format == "ntriples":
        return parse_ntriples(io.StringIO(text), lenient=lenient)
    if format == "turtle":
        return parse_turtle(text, lenient=lenient)
    raise UnsupportedFormat(format)
