import random

import pytest

from synqa.corpus import ROOT, Token, make_sentence, parse_inline
from synqa.index import WeightTable
from synqa.matcher import (
    EDGE,
    LENGTH,
    NODE,
    Alignment,
    AlignmentError,
    MatchParams,
    MatchProblem,
    ParamError,
    best_alignment,
    bnst1,
    bnst2,
    brute_force_alignment,
    parse_params,
    score_alignment,
)
from synqa.similarity import SimilarityModel

import randgen


def chunk(text):
    return parse_inline(text).bunsetsus[0]


def chain(*lemmas, sent_id="s"):
    """One NOUN per chunk, each chunk depending on the next."""
    return make_sentence(sent_id, [[Token(w, w, "NOUN")] for w in lemmas],
                         list(range(1, len(lemmas))) + [ROOT])


# -- node and edge terms -----------------------------------------------------

def test_bnst1_weighted_identity(model):
    w = WeightTable({"shuto": 5.9})
    assert bnst1(model, MatchParams(), chunk("shuto/NOUN wa/PART"), chunk("shuto/NOUN desu/OTHER"), w) == 5.9


def test_bnst1_interrogative(model):
    p = MatchParams(w_interr=10.0)
    assert bnst1(model, p, chunk("doko/INTERR desu/OTHER"), chunk("kanpara/NOUN wa/PART")) == 10.0
    assert bnst1(model, p, chunk("doko/INTERR desu/OTHER"), chunk("1215/NUM nen/NOUN")) == 0.0


def test_bnst1_unrelated(model):
    assert bnst1(model, MatchParams(), chunk("shuto/NOUN"), chunk("kanja/NOUN ga/PART")) == 0.0
    assert bnst1(model, MatchParams(), chunk("shuto/NOUN"), chunk("ga/PART")) == 0.0


def test_bnst1_unweighted_counts_lemmas(model):
    p = MatchParams(idf_weighting=False)
    assert bnst1(model, p, chunk("paakinson/NOUN byou/NOUN wa/PART"),
                 chunk("paakinson/NOUN byou/NOUN no/PART")) == 2.0


def test_bnst2_uganda_edge(model, questions, corpus):
    q, c = questions["q-uganda"], corpus["daijirin:uganda"]
    p = MatchParams(w_edge=1.6)
    assert bnst2(model, p, q, (0, 1), c, (1, 2)) == 1.6
    # no dependency from chunk 0 to chunk 1 in the candidate
    assert bnst2(model, p, q, (0, 1), c, (0, 1)) == 0.0
    with pytest.raises(AlignmentError):
        bnst2(model, p, q, (1, 0), c, (1, 2))


def test_edge_relax_grandparent():
    q = chain("a", "b")
    c = chain("a", "x", "b")
    m = SimilarityModel()
    strict = MatchParams(w_edge=1.0)
    relaxed = MatchParams(w_edge=1.0, edge_relax=True)
    assert bnst2(m, strict, q, (0, 1), c, (0, 2)) == 0.0
    assert bnst2(m, relaxed, q, (0, 1), c, (0, 2)) == 1.0


def test_identical_sentences_edge_terms():
    s = chain("a", "b", "c", "d")
    p = MatchParams(w_edge=1.0, idf_weighting=False, beta=0.0)
    m = SimilarityModel()
    al, bd = best_alignment(s, s, m, p)
    assert al.pairs == (0, 1, 2, 3)
    edges = [c for c in bd.contributions if c.kind == EDGE]
    assert [c.value for c in edges] == [1.0, 1.0, 1.0]
    assert brute_force_alignment(s, s, m, p)[1].total == bd.total


# -- scoring -----------------------------------------------------------------

def test_empty_alignment_is_length_penalty_only():
    q = chain("a", "b")
    c = chain("p", "q", "r", "s", "t", "u")
    bd = score_alignment(q, c, Alignment.empty(2), SimilarityModel(), MatchParams(beta=0.5))
    assert bd.total == -3.0
    assert bd.dnum == 6
    assert [x.kind for x in bd.contributions] == [LENGTH]


def test_uganda_alignment_components(model, questions, corpus, weights, example_params):
    q, c = questions["q-uganda"], corpus["daijirin:uganda"]
    p = example_params["uganda"].replace(w_interr=0.0)
    bd = score_alignment(q, c, Alignment((1, 2, 0)), model, p, weights)
    values = sorted(x.value for x in bd.contributions if x.kind in (NODE, EDGE) and x.value)
    assert values == [1.6, 5.9, 9.7]
    assert bd.total == pytest.approx(17.2, abs=1e-12)


def test_self_alignment_closed_form():
    rng = random.Random(7)
    for _ in range(30):
        n = rng.randint(1, 6)
        lemmas = rng.sample(randgen.VOCAB, n)
        chunks = []
        content = 0
        for w in lemmas:
            if rng.random() < 0.3:
                chunks.append([Token("no", "no", "PART")])
            else:
                chunks.append([Token(w, w, "NOUN"), Token("ga", "ga", "PART")])
                content += 1
        s = make_sentence("s", chunks, randgen.random_heads(rng, n))
        content_edges = sum(1 for i, h in s.edges()
                            if s.bunsetsus[i].content_lemmas() and s.bunsetsus[h].content_lemmas())
        w_edge = rng.uniform(0, 3)
        p = MatchParams(alpha=1.0, beta=0.0, w_edge=w_edge, idf_weighting=False)
        bd = score_alignment(s, s, Alignment(tuple(range(n))), SimilarityModel(), p)
        assert bd.total == pytest.approx(content + content_edges * w_edge, abs=1e-12)


def test_invalid_alignments():
    q, c = chain("a", "b"), chain("a", "b")
    m, p = SimilarityModel(), MatchParams()
    for bad in [(0, 0), (0, 5), (0,), (0, 1, None)]:
        with pytest.raises(AlignmentError):
            score_alignment(q, c, Alignment(bad), m, p)


def test_decomposition_identity_random():
    rng = random.Random(11)
    for _ in range(100):
        q, c, m, p, w = randgen.random_instance(rng)
        bd = score_alignment(q, c, randgen.random_alignment(rng, len(q), len(c)), m, p, w)
        assert bd.total == bd.b1 + bd.alpha * bd.b2 - bd.beta * bd.dnum
        b1 = b2 = 0.0
        for x in bd.contributions:
            if x.kind == NODE:
                b1 += x.value
            elif x.kind == EDGE:
                b2 += x.value
        assert (b1, b2) == (bd.b1, bd.b2)
        assert bd.dnum == len(c)


# -- search ------------------------------------------------------------------

def test_identity_is_optimal_for_self_match():
    s = chain("a", "b", "c")
    al, _ = best_alignment(s, s, SimilarityModel(), MatchParams(idf_weighting=False))
    assert al.pairs == (0, 1, 2)


def test_exact_matches_brute_force_small_random():
    rng = random.Random(3)
    for _ in range(40):
        q, c, m, p, w = randgen.random_instance(rng)
        a1, b1 = best_alignment(q, c, m, p, w)
        a2, b2 = brute_force_alignment(q, c, m, p, w)
        assert b1.total == b2.total
        assert a1 == a2  # same deterministic tie-break


def test_brute_force_one_by_one():
    q, c = chain("a"), chain("a")
    al, bd = brute_force_alignment(q, c, SimilarityModel(), MatchParams(idf_weighting=False, beta=0))
    assert al.pairs == (0,) and bd.total == 1.0
    al, bd = brute_force_alignment(chain("a"), chain("z"), SimilarityModel(), MatchParams(beta=0))
    assert al.pairs == (None,) and bd.total == 0.0


def test_brute_force_dominates_random_alignments():
    rng = random.Random(5)
    for _ in range(5):
        q, c, m, p, w = randgen.random_instance(rng, max_q=6, max_c=8)
        _, best = brute_force_alignment(q, c, m, p, w)
        for _ in range(1000):
            al = randgen.random_alignment(rng, len(q), len(c))
            assert best.total >= score_alignment(q, c, al, m, p, w).total


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force_alignment(chain(*"abcdefg"), chain("a"), SimilarityModel(), MatchParams())


def test_returned_alignments_are_injective():
    rng = random.Random(9)
    for _ in range(50):
        q, c, m, p, w = randgen.random_instance(rng, max_q=8, max_c=10)
        al, bd = best_alignment(q, c, m, p, w)
        al.validate(len(q), len(c))
        assert bd == score_alignment(q, c, al, m, p, w)


def test_zero_similarity_gives_empty_alignment():
    q = chain("a", "b", "c")
    c = chain("x", "y", "z", "w")
    p = MatchParams(beta=0.25)
    al, bd = best_alignment(q, c, SimilarityModel(), p)
    assert al == Alignment.empty(3)
    assert bd.total == -0.25 * 4


def test_alpha_monotone_for_fixed_alignment():
    rng = random.Random(13)
    for _ in range(50):
        q, c, m, p, w = randgen.random_instance(rng)
        al = randgen.random_alignment(rng, len(q), len(c))
        totals = [score_alignment(q, c, al, m, p.replace(alpha=a), w).total for a in (0, 0.5, 1, 2, 4)]
        assert totals == sorted(totals)


def test_beta_prefers_shorter_candidate():
    q = chain("a", "b")
    short = chain("a", "b", sent_id="short")
    long = make_sentence("long", [[Token("a", "a", "NOUN")], [Token("b", "b", "NOUN")],
                                  [Token("x", "x", "NOUN")]], [1, ROOT, 1])
    m, p = SimilarityModel(), MatchParams(beta=0.2, idf_weighting=False)
    s1 = best_alignment(q, short, m, p)[1]
    s2 = best_alignment(q, long, m, p)[1]
    assert (s1.b1, s1.b2) == (s2.b1, s2.b2)
    assert s1.total > s2.total


def test_heuristic_beyond_exact_limit_is_local_optimum():
    rng = random.Random(17)
    for _ in range(20):
        q, c, m, p, w = randgen.random_instance(rng, max_q=7, max_c=9)
        p = p.replace(exact_limit=1)
        al, bd = best_alignment(q, c, m, p, w)
        al.validate(len(q), len(c))
        exact = best_alignment(q, c, m, p.replace(exact_limit=10**6), w)[1]
        assert bd.total <= exact.total
        problem = MatchProblem(q, c, m, p, w)
        used = {x for x in al.pairs if x is not None}
        for i in range(len(q)):
            for target in [None] + [x for x in range(len(c)) if x not in used]:
                trial = list(al.pairs)
                trial[i] = target
                assert problem.total(trial) <= bd.total


def test_heuristic_is_deterministic(model, questions, corpus, weights, example_params):
    q, c = questions["q-parkinson"], corpus["mainichi:0001"]
    p = example_params["parkinson"]
    assert len(q) * len(c) > p.exact_limit
    runs = {best_alignment(q, c, model, p, weights) for _ in range(3)}
    assert len(runs) == 1


def test_parkinson_interrogative_alignment(model, questions, corpus, weights, example_params):
    q, c = questions["q-parkinson"], corpus["mainichi:0001"]
    for limit in (64, 10**6):
        al, _ = best_alignment(q, c, model, example_params["parkinson"].replace(exact_limit=limit), weights)
        assert c.bunsetsus[al.pairs[2]].surface == "kokushitsu ni-aru"


def test_interrogative_boost():
    m = SimilarityModel(type_lexicon={"tokyo": frozenset({"LOCATION"})})
    q = parse_inline("shuto/NOUN wa/PART || doko/INTERR")
    c = parse_inline("tokyo/NOUN wa/PART || shuto/NOUN")
    base = MatchParams(idf_weighting=False, beta=0, w_edge=0, w_interr=1)
    plain = best_alignment(q, c, m, base)[1]
    boosted = best_alignment(q, c, m, base.replace(interr_boost=3.0))[1]
    assert plain.b1 == 2.0
    assert boosted.b1 == 4.0


# -- parameters --------------------------------------------------------------

def test_params_config():
    p = parse_params("# comment\nalpha = 2\nw-edge=0.5\nidf_weighting=off\nexact_limit=10\n")
    assert (p.alpha, p.w_edge, p.idf_weighting, p.exact_limit) == (2.0, 0.5, False, 10)
    assert p.beta == MatchParams().beta
    for bad in ("alpha=-1", "gamma=1", "alpha", "exact_limit=0", "alpha=x", "idf_weighting=maybe"):
        with pytest.raises(ParamError):
            parse_params(bad)
