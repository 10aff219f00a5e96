import random

import pytest
from hypothesis import given, settings, strategies as st

from synqa.corpus import (
    ROOT,
    Bunsetsu,
    Corpus,
    CorpusError,
    Token,
    apply_entry_prefix,
    entry_bunsetsu,
    make_sentence,
    parse_corpus,
    parse_inline,
    serialize_corpus,
)

from randgen import random_heads

MINIMAL = """#sent s1
0 1 uganda uganda NOUN ; no no PART
1 -1 shuto shuto NOUN
"""


def test_minimal_sentence():
    c = parse_corpus(MINIMAL)
    assert len(c) == 1
    s = c["s1"]
    assert len(s) == 2
    assert s.heads == (1, ROOT)
    assert s.bunsetsus[0].tokens[1] == Token("no", "no", "PART")


@pytest.mark.parametrize("text, kind, line", [
    ("#sent s1\n0 0 a a NOUN\n", CorpusError.CYCLE, 2),
    ("#sent s1\n0 1 a a NOUN\n1 0 b b NOUN\n", CorpusError.CYCLE, 2),
    ("#sent s1\n0 -1 a a NOUN\n1 -1 b b NOUN\n", CorpusError.MULTIPLE_ROOTS, 3),
    ("#sent s1\n0 -1 a a NOUN\n\n#sent s1\n0 -1 b b NOUN\n", CorpusError.DUPLICATE_ID, 4),
    ("#sent s1\n0 -1 a a\n", CorpusError.MALFORMED, 2),
    ("#sent s1\n0 -1 a a FOO\n", CorpusError.MALFORMED, 2),
    ("#sent s1\nx -1 a a NOUN\n", CorpusError.MALFORMED, 2),
    ("0 -1 a a NOUN\n", CorpusError.MALFORMED, 1),
    ("#sent s1\n1 -1 a a NOUN\n", CorpusError.BAD_INDEX, 2),
    ("#sent s1\n0 5 a a NOUN\n1 -1 b b NOUN\n", CorpusError.BAD_HEAD, 2),
])
def test_errors_have_kind_and_location(text, kind, line):
    with pytest.raises(CorpusError) as exc:
        parse_corpus(text, source="t.txt")
    assert exc.value.kind == kind
    assert exc.value.line == line
    assert exc.value.column >= 1
    assert f"t.txt:{line}:" in str(exc.value)


def test_self_head_message():
    with pytest.raises(CorpusError, match="cyclic head relation"):
        parse_corpus("#sent s1\n0 1 a a NOUN\n1 1 b b NOUN\n")


def test_fixture_corpus_order_and_size(corpus):
    assert [s.id for s in corpus] == [
        "daijirin:uganda", "daijirin:magunakaruta", "daijirin:toukyou",
        "mainichi:0001", "mainichi:0002", "mainichi:0003", "mainichi:0004", "mainichi:0005",
    ]
    assert corpus.docs["daijirin-kanpara"] == "daijirin"
    assert corpus.docs["mainichi-1998"] == "mainichi"


def test_entry_prefix_applied_at_load(corpus):
    s = corpus["daijirin:uganda"]
    assert s.text.startswith("kanpara wa uganda")
    assert len(s) == 3
    # entry chunk depends on the original root, now shifted to index 2
    assert s.heads == (2, 2, ROOT)


def test_apply_entry_prefix_single_chunk():
    s = make_sentence("s", [[Token("shuto", "shuto", "NOUN")]], [ROOT])
    out = apply_entry_prefix(s, entry_bunsetsu("kanpara"))
    assert len(out) == 2
    assert out.heads == (1, ROOT)
    assert out.bunsetsus[0].surface == "kanpara wa"


def test_apply_entry_prefix_adds_topic_marker():
    s = make_sentence("s", [[Token("shuto", "shuto", "NOUN")]], [ROOT])
    entry = Bunsetsu(0, (Token("kanpara", "kanpara", "NOUN"),))
    assert apply_entry_prefix(s, entry, "wa").bunsetsus[0].surface == "kanpara wa"


def test_prefix_then_roundtrip():
    s = parse_corpus(MINIMAL)["s1"]
    prefixed = apply_entry_prefix(s, entry_bunsetsu("kanpara"))
    c = Corpus((prefixed,), {"default": "default"})
    assert parse_corpus(serialize_corpus(c)) == c


def test_empty_corpus_serializes_to_header():
    assert serialize_corpus(Corpus()) == "#format chunked-dep 1\n"
    assert len(parse_corpus(serialize_corpus(Corpus()))) == 0


def test_fixture_roundtrip_and_determinism(corpus):
    text = serialize_corpus(corpus)
    assert parse_corpus(text) == corpus
    assert serialize_corpus(corpus) == text
    assert "entry-prefix" not in text


def test_interleaved_docs_keep_order():
    text = ("#doc a\n#sent s1\n0 -1 x x NOUN\n\n#doc b\n#sent s2\n0 -1 y y NOUN\n\n"
            "#doc a\n#sent s3\n0 -1 z z NOUN\n")
    c = parse_corpus(text)
    assert [s.id for s in parse_corpus(serialize_corpus(c))] == ["s1", "s2", "s3"]


def test_inline_form():
    s = parse_inline("uganda/NOUN no/PART || shuto/shuto/NOUN wa/PART|2 || doko/INTERR")
    assert s.heads == (1, 2, ROOT)
    assert s.bunsetsus[0].tokens[0].lemma == "uganda"
    with pytest.raises(CorpusError):
        parse_inline("a/NOUN|0")
    with pytest.raises(CorpusError):
        parse_inline("a/b/c/NOUN")


_word = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789-", min_size=1, max_size=6)
_pos = st.sampled_from(["NOUN", "VERB", "ADJ", "ADV", "PRON", "INTERR", "NUM", "PART", "OTHER"])
_token = st.builds(Token, _word, _word, _pos)


@st.composite
def sentences(draw, sent_id):
    n = draw(st.integers(1, 6))
    chunks = [draw(st.lists(_token, min_size=1, max_size=3)) for _ in range(n)]
    heads = random_heads(random.Random(draw(st.integers(0, 10**6))), n)
    doc = draw(st.sampled_from(["d1", "d2"]))
    return make_sentence(sent_id, chunks, heads, doc)


@st.composite
def corpora(draw):
    n = draw(st.integers(0, 5))
    sents = tuple(draw(sentences(f"s{i}")) for i in range(n))
    docs = {s.doc_id: s.doc_id for s in sents}
    return Corpus(sents, docs)


@settings(max_examples=60, deadline=None)
@given(corpora())
def test_roundtrip_property(c):
    assert parse_corpus(serialize_corpus(c)) == c


@settings(max_examples=60, deadline=None)
@given(sentences("s"))
def test_entry_prefix_properties(s):
    out = apply_entry_prefix(s, entry_bunsetsu("entry"))
    assert len(out) == len(s) + 1
    assert out.heads[0] == s.root + 1
    assert out.heads.count(ROOT) == 1
    for i in range(len(out)):
        j, steps = i, 0
        while j != ROOT:
            j = out.heads[j]
            steps += 1
            assert steps <= len(out)
