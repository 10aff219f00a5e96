"""Inverted IDF index over content-word lemmas and keyword retrieval."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .corpus import CONTENT_POS, Corpus, Sentence

INDEX_MAGIC = "SYNQA-IDF 1"


class IndexFileError(ValueError):
    pass


class EmptyCorpusError(ValueError):
    pass


@dataclass(frozen=True)
class IdfIndex:
    n: int
    df: Mapping[str, int]
    postings: Mapping[str, tuple[str, ...]]

    def idf(self, lemma: str) -> float:
        # unseen lemmas count as df=1
        return math.log(self.n / max(self.df.get(lemma, 0), 1))

    @property
    def vocabulary_size(self) -> int:
        return len(self.df)


@dataclass(frozen=True)
class WeightTable:
    """Explicit per-lemma weights, falling back to another weight source.

    Used in place of corpus IDF when node weights must be pinned (for
    instance to reproduce hand-worked score tables).  Lemmas absent from the
    table use ``fallback.idf`` or 0.0 without a fallback.
    """

    weights: Mapping[str, float]
    fallback: IdfIndex | None = None

    def idf(self, lemma: str) -> float:
        if lemma in self.weights:
            return self.weights[lemma]
        return self.fallback.idf(lemma) if self.fallback is not None else 0.0


@dataclass(frozen=True)
class RetrievalHit:
    sentence_id: str
    idf_sum: float
    matched_keywords: frozenset[str] = field(default_factory=frozenset)


def build_index(corpus: Corpus) -> IdfIndex:
    if not len(corpus):
        raise EmptyCorpusError("cannot index an empty corpus")
    postings: dict[str, set[str]] = {}
    for s in corpus:
        for t in (t for b in s.bunsetsus for t in b.tokens):
            if t.pos in CONTENT_POS:
                postings.setdefault(t.lemma, set()).add(s.id)
    frozen = {lemma: tuple(sorted(ids)) for lemma, ids in sorted(postings.items())}
    return IdfIndex(len(corpus), {k: len(v) for k, v in frozen.items()}, frozen)


def extract_keywords(question: Sentence) -> set[str]:
    """Content lemmas of the question; interrogatives are never keywords."""
    return {t.lemma for b in question.bunsetsus for t in b.tokens if t.pos in CONTENT_POS}


def retrieve(index: IdfIndex, keywords: Iterable[str], k: int = 20) -> list[RetrievalHit]:
    """Top-``k`` sentences by summed keyword IDF, ties by ascending id.

    Sentences sharing no keyword are never returned; an empty keyword set
    gives an empty list.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    sums: dict[str, float] = {}
    matched: dict[str, set[str]] = {}
    # ascending lemma order fixes the float summation order
    for kw in sorted(set(keywords)):
        w = index.idf(kw)
        for sid in index.postings.get(kw, ()):
            sums[sid] = sums.get(sid, 0.0) + w
            matched.setdefault(sid, set()).add(kw)
    ranked = sorted(sums, key=lambda sid: (-sums[sid], sid))[:k]
    return [RetrievalHit(sid, sums[sid], frozenset(matched[sid])) for sid in ranked]


# -- persistence -------------------------------------------------------------

def dump_index(index: IdfIndex) -> str:
    lines = [INDEX_MAGIC, f"N {index.n}"]
    for lemma in sorted(index.df):
        lines.append(f"{lemma} {index.df[lemma]} {','.join(index.postings[lemma])}")
    return "\n".join(lines) + "\n"


def load_index(text: str) -> IdfIndex:
    lines = text.splitlines()
    if not lines or lines[0].strip() != INDEX_MAGIC:
        raise IndexFileError(f"not an index file (expected {INDEX_MAGIC!r} header)")
    try:
        key, n = lines[1].split()
        if key != "N":
            raise ValueError
        n = int(n)
    except (IndexError, ValueError):
        raise IndexFileError("line 2: expected 'N <count>'") from None
    df, postings = {}, {}
    for lineno, line in enumerate(lines[2:], 3):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise IndexFileError(f"line {lineno}: expected 'lemma df ids'")
        lemma, count, ids = parts
        ids = tuple(ids.split(","))
        if not count.isdigit() or int(count) != len(ids) or list(ids) != sorted(set(ids)) or not 1 <= len(ids) <= n:
            raise IndexFileError(f"line {lineno}: inconsistent postings for {lemma!r}")
        df[lemma] = int(count)
        postings[lemma] = ids
    return IdfIndex(n, df, postings)


def save_index(index: IdfIndex, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_index(index))


def read_index(path) -> IdfIndex:
    with open(path, encoding="utf-8") as f:
        return load_index(f.read())


def read_weights(path, fallback: IdfIndex | None = None) -> WeightTable:
    """Read a ``lemma<TAB>weight`` file."""
    weights = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                lemma, value = line.split("\t")
                value = float(value)
            except ValueError:
                raise IndexFileError(f"{path}:{lineno}: expected 'lemma<TAB>weight'") from None
            if value < 0:
                raise IndexFileError(f"{path}:{lineno}: negative weight")
            weights[lemma] = value
    return WeightTable(weights, fallback)
