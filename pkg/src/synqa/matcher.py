"""Structural matching of a question against a candidate sentence.

A candidate's score under an alignment of question chunks to candidate
chunks is

    total = B1 + alpha * B2 - beta * DNUM

where B1 sums node similarities of aligned chunk pairs, B2 sums similarities
of question dependency pairs whose images are also a dependency pair, and
DNUM is the candidate length in chunks.  `best_alignment` searches for the
alignment maximising the total.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .corpus import ROOT, Bunsetsu, Sentence
from .similarity import (
    InterrogativeClass,
    SimilarityModel,
    bunsetsu_types,
    interrogative_class,
    type_match,
    word_sim,
)

NODE, EDGE, LENGTH = "NODE", "EDGE", "LENGTH"

BRUTE_FORCE_MAX_Q = 6
BRUTE_FORCE_MAX_C = 8


class WeightSource(Protocol):
    def idf(self, lemma: str) -> float: ...


class ParamError(ValueError):
    pass


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class MatchParams:
    alpha: float = 1.0
    beta: float = 0.1
    w_interr: float = 10.0
    w_edge: float = 2.0
    exact_limit: int = 64
    idf_weighting: bool = True
    # accept cb2 up to two heads above cb1 for edge terms
    edge_relax: bool = False
    # node-score multiplier for chunks next to an interrogative; 1.0 = off
    interr_boost: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "w_interr", "w_edge", "interr_boost"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ParamError(f"{name} must be a finite number >= 0, got {v!r}")
        if not isinstance(self.exact_limit, int) or self.exact_limit < 1:
            raise ParamError(f"exact_limit must be an integer >= 1, got {self.exact_limit!r}")

    def replace(self, **changes) -> "MatchParams":
        return dataclasses.replace(self, **changes)

    def with_overrides(self, overrides: dict[str, str]) -> "MatchParams":
        """Apply textual ``key=value`` overrides (config file or CLI)."""
        fields = {f.name: f for f in dataclasses.fields(self)}
        changes = {}
        for raw_key, raw in overrides.items():
            key = raw_key.strip().replace("-", "_")
            if key not in fields:
                raise ParamError(f"unknown match parameter {raw_key!r}")
            changes[key] = _coerce(key, fields[key].type, str(raw).strip())
        return self.replace(**changes)


def _coerce(key, typ, raw):
    try:
        if typ in (bool, "bool"):
            low = raw.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError
            return low in ("1", "true", "yes", "on")
        if typ in (int, "int"):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ParamError(f"bad value for {key}: {raw!r}") from None


def parse_params(text: str, base: MatchParams | None = None) -> MatchParams:
    """Parse a ``key=value`` config; ``#`` comments and blank lines ignored.
    Keys that are not match parameters are rejected."""
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParamError(f"line {lineno}: expected key=value")
        overrides[key.strip()] = value.strip()
    return (base or MatchParams()).with_overrides(overrides)


def read_params(path, base: MatchParams | None = None) -> MatchParams:
    with open(path, encoding="utf-8") as f:
        return parse_params(f.read(), base)


@dataclass(frozen=True)
class Alignment:
    """``pairs[i]`` is the candidate chunk paired with question chunk ``i``,
    or None when it is left unpaired."""

    pairs: tuple[int | None, ...]

    @classmethod
    def empty(cls, n: int) -> "Alignment":
        return cls((None,) * n)

    @classmethod
    def from_mapping(cls, n: int, mapping: dict[int, int]) -> "Alignment":
        return cls(tuple(mapping.get(i) for i in range(n)))

    def mapping(self) -> dict[int, int]:
        return {i: c for i, c in enumerate(self.pairs) if c is not None}

    def key(self) -> tuple[int, ...]:
        # unpaired sorts first, so ties favour fewer pairs
        return tuple(-1 if c is None else c for c in self.pairs)

    def validate(self, n: int, m: int) -> None:
        if len(self.pairs) != n:
            raise AlignmentError(f"alignment covers {len(self.pairs)} question chunks, expected {n}")
        used = set()
        for i, c in enumerate(self.pairs):
            if c is None:
                continue
            if not isinstance(c, int) or not 0 <= c < m:
                raise AlignmentError(f"question chunk {i} paired with out-of-range chunk {c!r}")
            if c in used:
                raise AlignmentError(f"candidate chunk {c} paired twice")
            used.add(c)


@dataclass(frozen=True)
class Contribution:
    kind: str
    question: tuple[int, ...]
    candidate: tuple[int, ...]
    value: float


@dataclass(frozen=True)
class ScoreBreakdown:
    b1: float
    b2: float
    dnum: int
    total: float
    alpha: float
    beta: float
    contributions: tuple[Contribution, ...] = ()

    @property
    def structural(self) -> float:
        """B1 + alpha*B2: the score without the length penalty."""
        return self.b1 + self.alpha * self.b2


# -- node and edge terms -----------------------------------------------------

def _weight(params: MatchParams, weights: WeightSource | None, lemma: str) -> float:
    if not params.idf_weighting:
        return 1.0
    return weights.idf(lemma) if weights is not None else 1.0


def _lexical(model, qb: Bunsetsu, cb: Bunsetsu, weigh) -> float:
    targets = cb.content_lemmas()
    if not targets:
        return 0.0
    total = 0.0
    for w in qb.content_lemmas():
        total += weigh(w) * max(word_sim(model, w, v) for v in targets)
    return total


def bnst1(model: SimilarityModel, params: MatchParams, qb: Bunsetsu, cb: Bunsetsu,
          weights: WeightSource | None = None,
          interr: InterrogativeClass | None | bool = True) -> float:
    """Node similarity of question chunk ``qb`` paired with ``cb``.

    ``interr=True`` looks the interrogative class up from the model; pass a
    class (or None) to skip the lookup.
    """
    if interr is True:
        interr = interrogative_class(model, qb)
    if interr is not None:
        return params.w_interr * type_match(interr.expected, bunsetsu_types(model, cb))
    return _lexical(model, qb, cb, lambda w: _weight(params, weights, w))


def nsim(model: SimilarityModel, qb: Bunsetsu, cb: Bunsetsu,
         interr: InterrogativeClass | None | bool = True) -> float:
    """Unweighted node similarity in [0, 1] used inside edge terms."""
    if interr is True:
        interr = interrogative_class(model, qb)
    if interr is not None:
        return float(type_match(interr.expected, bunsetsu_types(model, cb)))
    lemmas = qb.content_lemmas()
    if not lemmas:
        return 0.0
    return _lexical(model, qb, cb, lambda w: 1.0) / len(lemmas)


def _edge_allowed(candidate: Sentence, c1: int, c2: int, relax: bool) -> bool:
    h = candidate.heads[c1]
    if h == c2:
        return True
    return relax and h != ROOT and candidate.heads[h] == c2


def bnst2(model: SimilarityModel, params: MatchParams, question: Sentence, qpair: tuple[int, int],
          candidate: Sentence, cpair: tuple[int, int]) -> float:
    """Edge similarity for question pair ``(b1, b2)`` (b1 depends on b2)
    paired with candidate chunks ``(cb1, cb2)``.  Zero unless cb1 depends on
    cb2 in the candidate."""
    b1, b2 = qpair
    if question.heads[b1] != b2:
        raise AlignmentError(f"question chunk {b1} does not depend on {b2}")
    cb1, cb2 = cpair
    if not _edge_allowed(candidate, cb1, cb2, params.edge_relax):
        return 0.0
    return (params.w_edge * nsim(model, question.bunsetsus[b1], candidate.bunsetsus[cb1])
            * nsim(model, question.bunsetsus[b2], candidate.bunsetsus[cb2]))


# -- the scoring problem -----------------------------------------------------

class MatchProblem:
    """Precomputed node/edge tables for one question/candidate pair.

    Edge terms are accumulated in completion order (an edge completes when
    its later endpoint is assigned, scanning question chunks left to right),
    so incremental search and full rescoring add identical floats in an
    identical order.
    """

    def __init__(self, question: Sentence, candidate: Sentence, model: SimilarityModel,
                 params: MatchParams, weights: WeightSource | None = None):
        self.question, self.candidate = question, candidate
        self.model, self.params = model, params
        n, m = len(question), len(candidate)
        self.n, self.m = n, m
        self.interr = [interrogative_class(model, b) for b in question.bunsetsus]

        boosted = set()
        if params.interr_boost != 1.0:
            for i, cls in enumerate(self.interr):
                if cls is None:
                    continue
                boosted.update(j for j, h in enumerate(question.heads) if h == i)
                if question.heads[i] != ROOT:
                    boosted.add(question.heads[i])
            boosted -= {i for i, cls in enumerate(self.interr) if cls is not None}

        self.node = []
        self.nsim = []
        for i, qb in enumerate(question.bunsetsus):
            scale = params.interr_boost if i in boosted else 1.0
            row = [bnst1(model, params, qb, cb, weights, self.interr[i]) for cb in candidate.bunsetsus]
            self.node.append([v * scale for v in row] if scale != 1.0 else row)
            self.nsim.append([nsim(model, qb, cb, self.interr[i]) for cb in candidate.bunsetsus])

        self.qedges = sorted(question.edges(), key=lambda e: (max(e), e[0]))
        self.cedge = [[_edge_allowed(candidate, c1, c2, params.edge_relax) if c1 != c2 else False
                       for c2 in range(m)] for c1 in range(m)]
        # edges completed when question chunk k is assigned
        self.completes = [[] for _ in range(n)]
        for e, (i, h) in enumerate(self.qedges):
            self.completes[max(i, h)].append((e, i, h))

        # admissible bounds
        self.node_max = [max([0.0] + row) for row in self.node]
        self.edge_max = []
        for i, h in self.qedges:
            best = 0.0
            for c1 in range(m):
                for c2 in range(m):
                    if self.cedge[c1][c2]:
                        best = max(best, self.edge_value(i, h, c1, c2))
            self.edge_max.append(best)
        self.node_suffix = [0.0] * (n + 1)
        for k in range(n - 1, -1, -1):
            self.node_suffix[k] = self.node_suffix[k + 1] + self.node_max[k]
        self.edge_open = [0.0] * (n + 1)
        for k in range(n, -1, -1):
            self.edge_open[k] = sum(self.edge_max[e] for e, (i, h) in enumerate(self.qedges)
                                    if max(i, h) >= k)

    def edge_value(self, i: int, h: int, c1: int, c2: int) -> float:
        if not self.cedge[c1][c2]:
            return 0.0
        return self.params.w_edge * self.nsim[i][c1] * self.nsim[h][c2]

    def penalty(self) -> float:
        return self.params.beta * self.m

    def combine(self, b1: float, b2: float) -> float:
        return b1 + self.params.alpha * b2 - self.params.beta * self.m

    def sums(self, pairs: Sequence[int | None]) -> tuple[float, float]:
        b1 = 0.0
        for i, c in enumerate(pairs):
            if c is not None:
                b1 += self.node[i][c]
        b2 = 0.0
        for i, h in self.qedges:
            if pairs[i] is not None and pairs[h] is not None:
                b2 += self.edge_value(i, h, pairs[i], pairs[h])
        return b1, b2

    def total(self, pairs: Sequence[int | None]) -> float:
        return self.combine(*self.sums(pairs))

    def breakdown(self, alignment: Alignment) -> ScoreBreakdown:
        pairs = alignment.pairs
        contributions = []
        b1 = 0.0
        for i, c in enumerate(pairs):
            if c is not None:
                v = self.node[i][c]
                b1 += v
                contributions.append(Contribution(NODE, (i,), (c,), v))
        b2 = 0.0
        for i, h in self.qedges:
            if pairs[i] is not None and pairs[h] is not None:
                v = self.edge_value(i, h, pairs[i], pairs[h])
                b2 += v
                contributions.append(Contribution(EDGE, (i, h), (pairs[i], pairs[h]), v))
        contributions.append(Contribution(LENGTH, (), tuple(range(self.m)), -self.penalty()))
        return ScoreBreakdown(b1, b2, self.m, self.combine(b1, b2),
                              self.params.alpha, self.params.beta, tuple(contributions))


def score_alignment(question: Sentence, candidate: Sentence, alignment: Alignment,
                    model: SimilarityModel, params: MatchParams,
                    weights: WeightSource | None = None) -> ScoreBreakdown:
    alignment.validate(len(question), len(candidate))
    return MatchProblem(question, candidate, model, params, weights).breakdown(alignment)


# -- search ------------------------------------------------------------------

def _better(total, key, best_total, best_key) -> bool:
    return total > best_total or (total == best_total and key < best_key)


def _branch_and_bound(problem: MatchProblem) -> Alignment:
    """Depth-first search over partial injective maps, question chunks in
    order.  The admissible bound cuts branches that cannot come within a
    rounding slack of the incumbent; survivors are compared exactly."""
    n, m = problem.n, problem.m
    alpha = problem.params.alpha
    node = problem.node
    pairs: list[int | None] = [None] * n
    used = [False] * m
    best = {"total": -math.inf, "key": None, "pairs": None}
    orders = [sorted(range(m), key=lambda c, i=i: (-node[i][c], c)) for i in range(n)]

    def visit(k, b1, b2):
        if k == n:
            total = problem.combine(b1, b2)
            key = tuple(-1 if c is None else c for c in pairs)
            if best["pairs"] is None or _better(total, key, best["total"], best["key"]):
                best.update(total=total, key=key, pairs=tuple(pairs))
            return
        if best["pairs"] is not None:
            bound = (b1 + problem.node_suffix[k] + alpha * (b2 + problem.edge_open[k])
                     - problem.penalty())
            if bound < best["total"] - 1e-9 * (1.0 + abs(best["total"])):
                return
        for c in orders[k] + [None]:
            if c is not None:
                if used[c]:
                    continue
                used[c] = True
            pairs[k] = c
            nb1 = b1 + node[k][c] if c is not None else b1
            nb2 = b2
            for _, i, h in problem.completes[k]:
                if pairs[i] is not None and pairs[h] is not None:
                    nb2 += problem.edge_value(i, h, pairs[i], pairs[h])
            visit(k + 1, nb1, nb2)
            pairs[k] = None
            if c is not None:
                used[c] = False

    visit(0, 0.0, 0.0)
    return Alignment(best["pairs"])


def _heuristic(problem: MatchProblem) -> Alignment:
    """Greedy seeding by node score, then best-improvement local search over
    single reassignments and pairwise swaps."""
    n, m = problem.n, problem.m
    pairs: list[int | None] = [None] * n
    used = set()
    seeds = sorted(((problem.node[i][c], i, c) for i in range(n) for c in range(m)
                    if problem.node[i][c] > 0), key=lambda t: (-t[0], t[1], t[2]))
    for _, i, c in seeds:
        if pairs[i] is None and c not in used:
            pairs[i] = c
            used.add(c)

    current = problem.total(pairs)
    while True:
        best_total, best_pairs = current, None
        for i in range(n):
            for c in [None] + [c for c in range(m) if c not in used]:
                if c == pairs[i]:
                    continue
                trial = list(pairs)
                trial[i] = c
                t = problem.total(trial)
                if t > best_total:
                    best_total, best_pairs = t, trial
        for i in range(n):
            for j in range(i + 1, n):
                if pairs[i] == pairs[j]:
                    continue
                trial = list(pairs)
                trial[i], trial[j] = trial[j], trial[i]
                t = problem.total(trial)
                if t > best_total:
                    best_total, best_pairs = t, trial
        if best_pairs is None:
            return Alignment(tuple(pairs))
        pairs, current = best_pairs, best_total
        used = {c for c in pairs if c is not None}


def best_alignment(question: Sentence, candidate: Sentence, model: SimilarityModel,
                   params: MatchParams, weights: WeightSource | None = None,
                   problem: MatchProblem | None = None) -> tuple[Alignment, ScoreBreakdown]:
    """Highest-scoring alignment.

    Exact branch and bound when ``len(question) * len(candidate)`` is within
    ``params.exact_limit`` (ties go to the lexicographically smallest
    alignment, unpaired first); greedy plus local search otherwise.
    """
    problem = problem or MatchProblem(question, candidate, model, params, weights)
    if problem.n * problem.m <= params.exact_limit:
        alignment = _branch_and_bound(problem)
    else:
        alignment = _heuristic(problem)
    return alignment, problem.breakdown(alignment)


def brute_force_alignment(question: Sentence, candidate: Sentence, model: SimilarityModel,
                          params: MatchParams, weights: WeightSource | None = None
                          ) -> tuple[Alignment, ScoreBreakdown]:
    """Exhaustive search over every partial injective map (test oracle)."""
    if len(question) > BRUTE_FORCE_MAX_Q or len(candidate) > BRUTE_FORCE_MAX_C:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_Q}x{BRUTE_FORCE_MAX_C} chunks, "
                         f"got {len(question)}x{len(candidate)}")
    problem = MatchProblem(question, candidate, model, params, weights)
    n, m = problem.n, problem.m
    best_total, best_key, best_pairs = -math.inf, None, None
    for size in range(min(n, m) + 1):
        for qs in itertools.combinations(range(n), size):
            for cs in itertools.permutations(range(m), size):
                pairs = [None] * n
                for q, c in zip(qs, cs):
                    pairs[q] = c
                total = problem.total(pairs)
                key = tuple(-1 if c is None else c for c in pairs)
                if best_pairs is None or _better(total, key, best_total, best_key):
                    best_total, best_key, best_pairs = total, key, tuple(pairs)
    alignment = Alignment(best_pairs)
    return alignment, problem.breakdown(alignment)
