"""Chunked dependency corpus: data model, reader, writer.

File layout (UTF-8, line oriented)::

    #format chunked-dep 1
    #doc <doc-id> [entry-prefix=<word>] [source=<name>]
    #sent <sent-id>
    <idx> <head|-1> <surface> <lemma> <POS> [; <surface> <lemma> <POS> ...]
    <blank line ends the sentence>

``head = -1`` marks the root chunk.  ``#sent`` blocks before any ``#doc`` line
belong to the document ``default``.  A ``#doc`` header carrying
``entry-prefix=W`` turns every sentence in it into ``W wa ...`` at load time,
the way dictionary definitions are made into matchable statements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

FORMAT_HEADER = "#format chunked-dep 1"
ROOT = -1
DEFAULT_DOC = "default"
DEFAULT_TOPIC_MARKER = "wa"

POS_TAGS = frozenset(
    {"NOUN", "VERB", "ADJ", "ADV", "PRON", "INTERR", "NUM", "PART", "OTHER"}
)
CONTENT_POS = frozenset({"NOUN", "VERB", "ADJ", "NUM"})
FUNCTION_POS = frozenset({"PART", "OTHER"})

_ID_RE = re.compile(r"^[^\s,]+$")


class CorpusError(ValueError):
    """Raised for malformed corpus input.

    ``kind`` is one of the class constants below; ``line`` and ``column``
    are 1-based and point at the first violation (0 when the problem is not
    tied to a position).
    """

    MALFORMED = "malformed line"
    DUPLICATE_ID = "duplicate sentence id"
    CYCLE = "cyclic head relation"
    MULTIPLE_ROOTS = "multiple roots"
    NO_ROOT = "missing root"
    BAD_INDEX = "bad bunsetsu index"
    BAD_HEAD = "head out of range"

    def __init__(self, kind: str, message: str, line: int = 0, column: int = 0,
                 source: str | None = None):
        self.kind = kind
        self.line = line
        self.column = column
        self.source = source
        where = f"{source or '<input>'}:{line}:{column}" if line else (source or "<input>")
        super().__init__(f"{where}: {kind}: {message}")


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: str

    def __post_init__(self):
        if not self.surface or not self.lemma:
            raise ValueError("token surface and lemma must be non-empty")
        if self.pos not in POS_TAGS:
            raise ValueError(f"unknown POS tag {self.pos!r}")

    @property
    def is_content(self) -> bool:
        return self.pos in CONTENT_POS


@dataclass(frozen=True)
class Bunsetsu:
    index: int
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("a bunsetsu needs at least one token")

    @property
    def surface(self) -> str:
        return " ".join(t.surface for t in self.tokens)

    def content_lemmas(self) -> list[str]:
        """Content-word lemmas in order, duplicates removed."""
        seen = []
        for t in self.tokens:
            if t.is_content and t.lemma not in seen:
                seen.append(t.lemma)
        return seen

    def has_pos(self, pos: str) -> bool:
        return any(t.pos == pos for t in self.tokens)


@dataclass(frozen=True)
class Sentence:
    id: str
    doc_id: str
    bunsetsus: tuple[Bunsetsu, ...]
    heads: tuple[int, ...]

    def __post_init__(self):
        validate_sentence(self)

    def __len__(self) -> int:
        return len(self.bunsetsus)

    @property
    def root(self) -> int:
        return self.heads.index(ROOT)

    def head(self, i: int) -> int:
        return self.heads[i]

    def edges(self) -> list[tuple[int, int]]:
        """Dependency pairs ``(dependent, head)`` ordered by dependent."""
        return [(i, h) for i, h in enumerate(self.heads) if h != ROOT]

    @property
    def text(self) -> str:
        return " ".join(b.surface for b in self.bunsetsus)

    def lemmas(self) -> set[str]:
        return {t.lemma for b in self.bunsetsus for t in b.tokens if t.is_content}


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...] = ()
    docs: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        ids = set()
        for s in self.sentences:
            if s.id in ids:
                raise CorpusError(CorpusError.DUPLICATE_ID, f"sentence id {s.id!r} repeated")
            ids.add(s.id)
        object.__setattr__(self, "_by_id", {s.id: s for s in self.sentences})

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __getitem__(self, sent_id: str) -> Sentence:
        return self._by_id[sent_id]

    def __contains__(self, sent_id: object) -> bool:
        return sent_id in self._by_id

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.sentences == other.sentences and dict(self.docs) == dict(other.docs)

    def __hash__(self):
        return hash(self.sentences)


def validate_sentence(s: Sentence) -> None:
    n = len(s.bunsetsus)
    if n == 0:
        raise CorpusError(CorpusError.MALFORMED, f"sentence {s.id!r} has no bunsetsu")
    if len(s.heads) != n:
        raise CorpusError(CorpusError.MALFORMED, f"sentence {s.id!r}: heads/bunsetsu length mismatch")
    for i, b in enumerate(s.bunsetsus):
        if b.index != i:
            raise CorpusError(CorpusError.BAD_INDEX, f"sentence {s.id!r}: expected index {i}, got {b.index}")
    _check_heads(s.id, s.heads)


def _check_heads(sent_id: str, heads: Sequence[int],
                 where: Sequence[tuple[int, int]] | None = None,
                 source: str | None = None) -> None:
    """Validate a head vector: in range, no self loops, one root, acyclic.

    ``where`` gives the (line, column) of each head field for error reports.
    """
    n = len(heads)

    def loc(i):
        return where[i] if where else (0, 0)

    roots = [i for i, h in enumerate(heads) if h == ROOT]
    for i, h in enumerate(heads):
        if h == i:
            raise CorpusError(CorpusError.CYCLE, f"sentence {sent_id!r}: bunsetsu {i} heads itself",
                              *loc(i), source=source)
        if h != ROOT and not 0 <= h < n:
            raise CorpusError(CorpusError.BAD_HEAD, f"sentence {sent_id!r}: head {h} of bunsetsu {i}",
                              *loc(i), source=source)
    if len(roots) > 1:
        raise CorpusError(CorpusError.MULTIPLE_ROOTS,
                          f"sentence {sent_id!r}: roots at {roots}", *loc(roots[1]), source=source)
    for i in range(n):
        seen = set()
        j = i
        while j != ROOT:
            if j in seen:
                raise CorpusError(CorpusError.CYCLE, f"sentence {sent_id!r}: cycle through bunsetsu {i}",
                                  *loc(i), source=source)
            seen.add(j)
            j = heads[j]
    if not roots:
        raise CorpusError(CorpusError.NO_ROOT, f"sentence {sent_id!r} has no root",
                          *loc(n - 1), source=source)


def make_sentence(sent_id: str, chunks: Iterable[Sequence[Token]], heads: Sequence[int],
                  doc_id: str = DEFAULT_DOC) -> Sentence:
    bunsetsus = tuple(Bunsetsu(i, tuple(toks)) for i, toks in enumerate(chunks))
    return Sentence(sent_id, doc_id, bunsetsus, tuple(heads))


def entry_bunsetsu(word: str, topic_marker: str = DEFAULT_TOPIC_MARKER) -> Bunsetsu:
    return Bunsetsu(0, (Token(word, word.lower(), "NOUN"),
                        Token(topic_marker, topic_marker.lower(), "PART")))


def apply_entry_prefix(sentence: Sentence, entry: Bunsetsu,
                       topic_marker: str | None = None) -> Sentence:
    """Prepend a dictionary entry chunk ("<word> wa") to a definition sentence.

    The new chunk takes index 0 and depends on the old root; every existing
    index and head link shifts by one.  If ``topic_marker`` is given and the
    entry chunk does not already end with it, a PART token is appended.
    """
    tokens = list(entry.tokens)
    if topic_marker and tokens[-1].surface != topic_marker:
        tokens.append(Token(topic_marker, topic_marker.lower(), "PART"))
    chunks = [tuple(tokens)] + [b.tokens for b in sentence.bunsetsus]
    heads = [sentence.root + 1] + [h if h == ROOT else h + 1 for h in sentence.heads]
    return make_sentence(sentence.id, chunks, heads, sentence.doc_id)


# -- reading -----------------------------------------------------------------

def _parse_token_group(group: str, lineno: int, column: int, source):
    fields = group.split()
    if len(fields) != 3:
        raise CorpusError(CorpusError.MALFORMED,
                          f"token group needs 'surface lemma POS', got {group.strip()!r}",
                          lineno, column, source)
    surface, lemma, pos = fields
    if pos not in POS_TAGS:
        raise CorpusError(CorpusError.MALFORMED, f"unknown POS tag {pos!r}", lineno, column, source)
    return Token(surface, lemma, pos)


def _parse_bunsetsu_line(line: str, lineno: int, source):
    m = re.match(r"\s*(\S+)\s+(\S+)\s+", line)
    if not m:
        raise CorpusError(CorpusError.MALFORMED, f"expected '<idx> <head> <tokens>', got {line!r}",
                          lineno, 1, source)
    try:
        idx = int(m.group(1))
    except ValueError:
        raise CorpusError(CorpusError.MALFORMED, f"bad index {m.group(1)!r}", lineno,
                          m.start(1) + 1, source) from None
    try:
        head = int(m.group(2))
    except ValueError:
        raise CorpusError(CorpusError.MALFORMED, f"bad head {m.group(2)!r}", lineno,
                          m.start(2) + 1, source) from None
    head_col = m.start(2) + 1
    tokens = []
    pos = m.end()
    for group in line[m.end():].split(";"):
        tokens.append(_parse_token_group(group, lineno, pos + 1, source))
        pos += len(group) + 1
    return idx, head, tuple(tokens), head_col


def _parse_header(line: str, lineno: int, source) -> tuple[str, dict]:
    parts = line.split()
    if len(parts) < 2:
        raise CorpusError(CorpusError.MALFORMED, f"{parts[0]} needs an identifier", lineno, 1, source)
    ident = parts[1]
    if not _ID_RE.match(ident):
        raise CorpusError(CorpusError.MALFORMED, f"bad identifier {ident!r}", lineno,
                          line.index(ident) + 1, source)
    opts = {}
    for opt in parts[2:]:
        key, sep, value = opt.partition("=")
        if not sep or not value:
            raise CorpusError(CorpusError.MALFORMED, f"bad option {opt!r}", lineno,
                              line.index(opt) + 1, source)
        opts[key] = value
    return ident, opts


def parse_corpus(text: str | Iterable[str], source: str | None = None,
                 topic_marker: str = DEFAULT_TOPIC_MARKER) -> Corpus:
    """Parse corpus text (a string or an iterable of lines) into a `Corpus`."""
    lines = text.splitlines() if isinstance(text, str) else [l.rstrip("\r\n") for l in text]

    sentences: list[Sentence] = []
    docs: dict[str, str] = {}
    seen_ids: dict[str, int] = {}
    doc_id, entry = DEFAULT_DOC, None
    current: dict | None = None

    def finish():
        nonlocal current
        if current is None:
            return
        rows = current["rows"]
        if not rows:
            raise CorpusError(CorpusError.MALFORMED, f"sentence {current['id']!r} is empty",
                              current["line"], 1, source)
        for expected, (idx, _, _, lineno, _) in enumerate(rows):
            if idx != expected:
                raise CorpusError(CorpusError.BAD_INDEX, f"expected bunsetsu index {expected}, got {idx}",
                                  lineno, 1, source)
        heads = [r[1] for r in rows]
        _check_heads(current["id"], heads, [(r[3], r[4]) for r in rows], source)
        if current["doc"] not in docs:
            docs[current["doc"]] = current["doc"]
        sent = make_sentence(current["id"], [r[2] for r in rows], heads, current["doc"])
        if current["entry"]:
            sent = apply_entry_prefix(sent, entry_bunsetsu(current["entry"], topic_marker))
        sentences.append(sent)
        current = None

    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            finish()
            continue
        if line.startswith("#doc"):
            finish()
            doc_id, opts = _parse_header(line, lineno, source)
            entry = opts.get("entry-prefix")
            docs[doc_id] = opts.get("source", doc_id)
        elif line.startswith("#sent"):
            finish()
            sent_id, _ = _parse_header(line, lineno, source)
            if sent_id in seen_ids:
                raise CorpusError(CorpusError.DUPLICATE_ID,
                                  f"sentence id {sent_id!r} already used on line {seen_ids[sent_id]}",
                                  lineno, line.index(sent_id) + 1, source)
            seen_ids[sent_id] = lineno
            current = {"id": sent_id, "doc": doc_id, "entry": entry, "rows": [], "line": lineno}
        elif line.startswith("#"):
            continue
        else:
            if current is None:
                raise CorpusError(CorpusError.MALFORMED, "bunsetsu line outside a #sent block",
                                  lineno, 1, source)
            idx, head, tokens, head_col = _parse_bunsetsu_line(raw, lineno, source)
            current["rows"].append((idx, head, tokens, lineno, head_col))
    finish()
    return Corpus(tuple(sentences), docs)


def read_corpus(path, topic_marker: str = DEFAULT_TOPIC_MARKER) -> Corpus:
    with open(path, encoding="utf-8") as f:
        return parse_corpus(f.read(), source=str(path), topic_marker=topic_marker)


def merge_corpora(corpora: Iterable[Corpus]) -> Corpus:
    sentences, docs = [], {}
    for c in corpora:
        sentences.extend(c.sentences)
        docs.update(c.docs)
    return Corpus(tuple(sentences), docs)


# -- writing -----------------------------------------------------------------

def format_sentence(s: Sentence) -> str:
    out = [f"#sent {s.id}"]
    for b, h in zip(s.bunsetsus, s.heads):
        toks = " ; ".join(f"{t.surface} {t.lemma} {t.pos}" for t in b.tokens)
        out.append(f"{b.index} {h} {toks}")
    return "\n".join(out) + "\n"


def serialize_corpus(corpus: Corpus) -> str:
    """Write the normalized form: entry prefixes are already applied, so doc
    headers carry only ``source=`` and reparsing gives an equal corpus."""
    out = [FORMAT_HEADER + "\n"]
    current = None
    written = set()
    for s in corpus.sentences:
        if s.doc_id != current:
            current = s.doc_id
            written.add(current)
            out.append("\n" + _doc_header(current, corpus.docs.get(current, current)) + "\n")
        out.append(format_sentence(s) + "\n")
    for d, src in corpus.docs.items():
        if d not in written:
            out.append("\n" + _doc_header(d, src) + "\n")
    return "".join(out)


def _doc_header(doc_id: str, source: str) -> str:
    return f"#doc {doc_id}" + (f" source={source}" if source != doc_id else "")


def parse_inline(text: str, sent_id: str = "q", doc_id: str = DEFAULT_DOC) -> Sentence:
    """Parse the one-line question form used interactively.

    Chunks are separated by ``||``; a chunk is whitespace-separated tokens,
    each ``surface/lemma/POS`` or ``surface/POS`` (lemma = lowercased
    surface), optionally ending in ``|head``.  Chunks without a head depend
    on the next chunk; the last one without a head is the root.

        uganda/NOUN no/PART || shuto/NOUN wa/PART || doko/INTERR desu/OTHER ka/PART
    """
    chunks, heads = [], []
    raw_chunks = [c.strip() for c in text.split("||")]
    for ci, raw in enumerate(raw_chunks):
        body, sep, head = raw.rpartition("|") if "|" in raw else (raw, "", "")
        tokens = []
        for item in body.split():
            parts = item.split("/")
            if len(parts) == 2:
                surface, pos = parts
                lemma = surface.lower()
            elif len(parts) == 3:
                surface, lemma, pos = parts
            else:
                raise CorpusError(CorpusError.MALFORMED, f"chunk {ci}: bad token {item!r}", 1, 1)
            if pos not in POS_TAGS or not surface or not lemma:
                raise CorpusError(CorpusError.MALFORMED, f"chunk {ci}: bad token {item!r}", 1, 1)
            tokens.append(Token(surface, lemma, pos))
        if not tokens:
            raise CorpusError(CorpusError.MALFORMED, f"chunk {ci} is empty", 1, 1)
        if sep:
            try:
                h = int(head)
            except ValueError:
                raise CorpusError(CorpusError.MALFORMED, f"chunk {ci}: bad head {head!r}", 1, 1) from None
        else:
            h = ci + 1 if ci + 1 < len(raw_chunks) else ROOT
        chunks.append(tuple(tokens))
        heads.append(h)
    _check_heads(sent_id, heads)
    return make_sentence(sent_id, chunks, heads, doc_id)
