"""Lexical similarity and semantic typing of chunks.

Word similarity falls back through three tiers: identical lemmas, a
symmetric synonym table, then Wu-Palmer similarity over a class taxonomy.
Chunk typing (is this chunk a place? a year?) comes from a lemma->class
lexicon plus numeric-unit rules such as ``NUM + nen -> TIME_YEAR``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .corpus import Bunsetsu

ANY = "ANY"
LOCATION = "LOCATION"
PERSON = "PERSON"
ORGANIZATION = "ORGANIZATION"
TIME_YEAR = "TIME_YEAR"
NUMBER = "NUMBER"
ARTIFACT = "ARTIFACT"

BLANK = "___"

DEFAULT_INTERROGATIVES = {
    ("doko", None): LOCATION,
    ("dare", None): PERSON,
    ("itsu", None): TIME_YEAR,
    ("nan", "nen"): TIME_YEAR,
    ("nan", "nin"): NUMBER,
    ("ikutsu", None): NUMBER,
    ("nani", None): ANY,
    ("nan", None): ANY,
    ("dono", None): ANY,
}
DEFAULT_UNIT_RULES = (("NUM", "nen", TIME_YEAR),)


class ResourceError(ValueError):
    pass


@dataclass(frozen=True)
class InterrogativeClass:
    trigger: tuple[str, ...]
    expected: str


@dataclass(frozen=True)
class UnitRule:
    pos: str
    unit: str
    cls: str


class Taxonomy:
    """A forest of named classes; lemmas attach to one or more classes."""

    def __init__(self, parents: Mapping[str, str | None] | None = None,
                 members: Mapping[str, Iterable[str]] | None = None):
        self.parents = dict(parents or {})
        self.members = {lemma: tuple(nodes) for lemma, nodes in (members or {}).items()}
        for nodes in self.members.values():
            for n in nodes:
                if n not in self.parents:
                    raise ResourceError(f"lemma attached to unknown class {n!r}")
        self._depth = {}
        for node in self.parents:
            self._depth[node] = len(self.path(node))

    def path(self, node: str) -> list[str]:
        """Node followed by its ancestors up to the root."""
        out, seen = [], set()
        while node is not None:
            if node in seen:
                raise ResourceError(f"taxonomy cycle through {node!r}")
            seen.add(node)
            out.append(node)
            node = self.parents[node]
        return out

    def depth(self, node: str) -> int:
        return self._depth[node]

    def lca(self, a: str, b: str) -> str | None:
        ancestors = set(self.path(a))
        for node in self.path(b):
            if node in ancestors:
                return node
        return None

    def similarity(self, a: str, b: str) -> float | None:
        """Best Wu-Palmer score over the lemmas' class memberships; None when
        either lemma is absent or the two share no tree."""
        best = None
        for na in self.members.get(a, ()):
            for nb in self.members.get(b, ()):
                top = self.lca(na, nb)
                if top is None:
                    continue
                score = 2.0 * self.depth(top) / (self.depth(na) + self.depth(nb))
                if best is None or score > best:
                    best = score
        return best


@dataclass(frozen=True)
class SimilarityModel:
    synonyms: Mapping[tuple[str, str], float] = field(default_factory=dict)
    taxonomy: Taxonomy = field(default_factory=Taxonomy)
    type_lexicon: Mapping[str, frozenset[str]] = field(default_factory=dict)
    unit_rules: tuple[UnitRule, ...] = tuple(UnitRule(*r) for r in DEFAULT_UNIT_RULES)
    interrogatives: Mapping[tuple[str, str | None], str] = field(
        default_factory=lambda: dict(DEFAULT_INTERROGATIVES))

    def __post_init__(self):
        for (a, b), v in self.synonyms.items():
            if not 0.0 <= v <= 1.0:
                raise ResourceError(f"similarity {a}/{b}={v} outside [0, 1]")
            if self.synonyms.get((b, a)) != v:
                raise ResourceError(f"synonym table not symmetric for {a}/{b}")


def word_sim(model: SimilarityModel, a: str, b: str) -> float:
    if a == b:
        return 1.0
    v = model.synonyms.get((a, b))
    if v is not None:
        return v
    v = model.taxonomy.similarity(a, b)
    return v if v is not None else 0.0


def bunsetsu_types(model: SimilarityModel, b: Bunsetsu) -> frozenset[str]:
    classes = set()
    for lemma in b.content_lemmas():
        classes |= model.type_lexicon.get(lemma, frozenset())
    toks = b.tokens
    for rule in model.unit_rules:
        for i, t in enumerate(toks):
            if t.pos == rule.pos and any(u.lemma == rule.unit for u in toks[i + 1:]):
                classes.add(rule.cls)
                break
    return frozenset(classes)


def interrogative_class(model: SimilarityModel, b: Bunsetsu) -> InterrogativeClass | None:
    """Answer type demanded by an interrogative (or blank) chunk.

    A noun right after the interrogative refines the lookup, so ``nan nen``
    ("what year") is looked up before bare ``nan``.  Unknown interrogatives
    and blanks accept any answer type.
    """
    toks = b.tokens
    for i, t in enumerate(toks):
        if t.surface == BLANK:
            return InterrogativeClass((BLANK,), ANY)
        if t.pos != "INTERR":
            continue
        noun = toks[i + 1].lemma if i + 1 < len(toks) and toks[i + 1].pos == "NOUN" else None
        if noun is not None and (t.lemma, noun) in model.interrogatives:
            return InterrogativeClass((t.lemma, noun), model.interrogatives[t.lemma, noun])
        return InterrogativeClass((t.lemma,), model.interrogatives.get((t.lemma, None), ANY))
    return None


def type_match(expected: str, candidate_types: Iterable[str]) -> int:
    return int(expected == ANY or expected in set(candidate_types))


# -- resource files ----------------------------------------------------------

def _rows(path, min_fields, max_fields=None):
    max_fields = max_fields or min_fields
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if not min_fields <= len(parts) <= max_fields:
                raise ResourceError(f"{path}:{lineno}: expected {min_fields} tab-separated fields")
            yield lineno, [p.strip() for p in parts]


def read_synonyms(path) -> dict[tuple[str, str], float]:
    table: dict[tuple[str, str], float] = {}
    for lineno, (a, b, value) in _rows(path, 3):
        try:
            v = float(value)
        except ValueError:
            raise ResourceError(f"{path}:{lineno}: bad similarity {value!r}") from None
        if not 0.0 <= v <= 1.0:
            raise ResourceError(f"{path}:{lineno}: similarity {v} outside [0, 1]")
        for key in ((a, b), (b, a)):
            if table.get(key, v) != v:
                raise ResourceError(f"{path}:{lineno}: conflicting value for {a}/{b}")
            table[key] = v
    return table


def parse_taxonomy(text: str, source: str = "<taxonomy>") -> Taxonomy:
    """Indented class tree; ``= lemma`` lines attach a lemma to the class
    above them.

        PLACE
          CITY
            = kanpara
    """
    parents: dict[str, str | None] = {}
    members: dict[str, list[str]] = {}
    stack: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.expandtabs(4)
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        indent = len(line) - len(line.lstrip())
        name = line.strip()
        while stack and stack[-1][0] >= indent:
            stack.pop()
        if name.startswith("="):
            lemma = name[1:].strip()
            if not stack or not lemma:
                raise ResourceError(f"{source}:{lineno}: membership line outside a class")
            members.setdefault(lemma, []).append(stack[-1][1])
            continue
        if name in parents:
            raise ResourceError(f"{source}:{lineno}: class {name!r} defined twice")
        parents[name] = stack[-1][1] if stack else None
        stack.append((indent, name))
    return Taxonomy(parents, members)


def read_taxonomy(path) -> Taxonomy:
    with open(path, encoding="utf-8") as f:
        return parse_taxonomy(f.read(), str(path))


def read_type_lexicon(path) -> dict[str, frozenset[str]]:
    lexicon: dict[str, frozenset[str]] = {}
    for _, (lemma, classes) in _rows(path, 2):
        found = frozenset(c.strip() for c in classes.split(",") if c.strip())
        lexicon[lemma] = lexicon.get(lemma, frozenset()) | found
    return lexicon


def read_unit_rules(path) -> tuple[UnitRule, ...]:
    return tuple(UnitRule(pos, unit, cls) for _, (pos, unit, cls) in _rows(path, 3))


def read_interrogatives(path) -> dict[tuple[str, str | None], str]:
    table: dict[tuple[str, str | None], str] = {}
    for lineno, (trigger, cls) in _rows(path, 2):
        words = trigger.split()
        if len(words) not in (1, 2):
            raise ResourceError(f"{path}:{lineno}: trigger must be 'lemma' or 'lemma noun'")
        key = (words[0], words[1] if len(words) == 2 else None)
        if key in table and table[key] != cls:
            raise ResourceError(f"{path}:{lineno}: trigger {trigger!r} mapped twice")
        table[key] = cls
    return table


def load_model(synonyms=None, taxonomy=None, types=None, interrogatives=None,
               units=None) -> SimilarityModel:
    """Build a model from resource file paths; missing ones use defaults."""
    kwargs = {}
    if synonyms:
        kwargs["synonyms"] = read_synonyms(synonyms)
    if taxonomy:
        kwargs["taxonomy"] = read_taxonomy(taxonomy)
    if types:
        kwargs["type_lexicon"] = read_type_lexicon(types)
    if interrogatives:
        kwargs["interrogatives"] = read_interrogatives(interrogatives)
    if units:
        kwargs["unit_rules"] = read_unit_rules(units)
    return SimilarityModel(**kwargs)
