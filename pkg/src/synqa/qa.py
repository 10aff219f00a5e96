"""Question answering pipeline: classify, retrieve, match, extract."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .corpus import FUNCTION_POS, Corpus, Sentence
from .index import IdfIndex, extract_keywords, retrieve
from .matcher import (
    EDGE,
    NODE,
    Alignment,
    MatchParams,
    ScoreBreakdown,
    WeightSource,
    best_alignment,
    score_alignment,
)
from .similarity import BLANK, SimilarityModel, interrogative_class

DEFAULT_K = 20
DEFAULT_THETA = 0.5


class QuestionKind(str, enum.Enum):
    WH = "WH"
    YES_NO = "YES_NO"
    FILL_BLANK = "FILL_BLANK"


class NoKeywords(LookupError):
    """The question has no content word to retrieve with."""


@dataclass(frozen=True)
class Answer:
    text: str | None
    sentence_id: str
    score: float
    breakdown: ScoreBreakdown
    alignment: Alignment

    @property
    def answerless(self) -> bool:
        return self.text is None


@dataclass(frozen=True)
class YesNo:
    decision: str
    normalized: float

    def __str__(self):
        return f"{self.decision} ({self.normalized:.2f})"


@dataclass(frozen=True)
class AnswerResult:
    question_id: str
    kind: QuestionKind
    answers: tuple[Answer, ...]
    yesno: YesNo | None = None
    interrogative: int | None = None

    @property
    def top(self) -> Answer | None:
        """Best candidate that actually supplies an answer."""
        for a in self.answers:
            if not a.answerless:
                return a
        return None


def classify_question(question: Sentence) -> QuestionKind:
    toks = [t for b in question.bunsetsus for t in b.tokens]
    if any(t.surface == BLANK for t in toks):
        return QuestionKind.FILL_BLANK
    if any(t.pos == "INTERR" for t in toks):
        return QuestionKind.WH
    return QuestionKind.YES_NO


def interrogative_index(question: Sentence, model: SimilarityModel) -> int | None:
    for b in question.bunsetsus:
        if interrogative_class(model, b) is not None:
            return b.index
    return None


def extract_answer(candidate: Sentence, alignment: Alignment, interr_index: int,
                   unit: str | None = None) -> str | None:
    """Surface of the chunk paired with the interrogative, minus trailing
    function words.  A trailing ``unit`` noun after a number is dropped too
    ("1215 nen" -> "1215" when the question asked "nan nen").  Returns None
    when the interrogative is unpaired."""
    c = alignment.pairs[interr_index]
    if c is None:
        return None
    tokens = list(candidate.bunsetsus[c].tokens)
    while tokens and tokens[-1].pos in FUNCTION_POS:
        tokens.pop()
    if (unit is not None and len(tokens) >= 2 and tokens[-1].lemma == unit
            and tokens[-2].pos == "NUM"):
        tokens.pop()
    if not tokens:
        return candidate.bunsetsus[c].surface
    return " ".join(t.surface for t in tokens)


def self_match(question: Sentence, model: SimilarityModel, params: MatchParams,
               weights: WeightSource | None = None) -> ScoreBreakdown:
    """Score of the question against itself under the identity alignment."""
    identity = Alignment(tuple(range(len(question))))
    return score_alignment(question, question, identity, model, params, weights)


def yes_no_decision(best: ScoreBreakdown | None, self_score: ScoreBreakdown,
                    theta: float = DEFAULT_THETA) -> YesNo:
    """YES iff (B1 + alpha*B2) of the best candidate reaches ``theta`` times
    the question's self-match value.  The length penalty is left out of both
    sides."""
    denom = self_score.structural
    if best is None or denom <= 0:
        return YesNo("NO", 0.0)
    normalized = min(1.0, max(0.0, best.structural / denom))
    return YesNo("YES" if normalized >= theta else "NO", normalized)


def answer(question: Sentence, corpus: Corpus, index: IdfIndex, model: SimilarityModel,
           params: MatchParams, k: int = DEFAULT_K, theta: float = DEFAULT_THETA,
           weights: WeightSource | None = None) -> AnswerResult:
    kind = classify_question(question)
    keywords = extract_keywords(question)
    if not keywords:
        raise NoKeywords(f"question {question.id!r} has no content words")
    weights = weights if weights is not None else index

    scored = []
    for hit in retrieve(index, keywords, k):
        candidate = corpus[hit.sentence_id]
        alignment, breakdown = best_alignment(question, candidate, model, params, weights)
        scored.append((breakdown.total, candidate.id, candidate, alignment, breakdown))
    scored.sort(key=lambda t: (-t[0], t[1]))

    interr = interrogative_index(question, model) if kind is not QuestionKind.YES_NO else None
    unit = None
    if interr is not None:
        trigger = interrogative_class(model, question.bunsetsus[interr]).trigger
        unit = trigger[1] if len(trigger) > 1 else None

    answers = []
    for total, sid, candidate, alignment, breakdown in scored:
        text = extract_answer(candidate, alignment, interr, unit) if interr is not None else None
        answers.append(Answer(text, sid, total, breakdown, alignment))

    yesno = None
    if kind is QuestionKind.YES_NO:
        best = answers[0].breakdown if answers else None
        yesno = yes_no_decision(best, self_match(question, model, params, weights), theta)
    return AnswerResult(question.id, kind, tuple(answers), yesno, interr)


def answer_all(questions: Iterable[Sentence], *args, **kwargs) -> list[AnswerResult | NoKeywords]:
    """Answer each question; a question without keywords yields its
    `NoKeywords` error in place of a result."""
    out = []
    for q in questions:
        try:
            out.append(answer(q, *args, **kwargs))
        except NoKeywords as e:
            out.append(e)
    return out


def normalize_answer(text: str | None) -> str:
    return " ".join((text or "").lower().split())


# -- explanations ------------------------------------------------------------

def _label(sentence: Sentence, indices) -> str:
    parts = []
    for i in indices:
        b = sentence.bunsetsus[i]
        content = [t.surface for t in b.tokens if t.pos not in FUNCTION_POS]
        parts.append(" ".join(content) if content else b.surface)
    return " ".join(parts)


def explain_rows(question: Sentence, candidate: Sentence,
                 breakdown: ScoreBreakdown) -> list[tuple[str, str, str, float]]:
    """``(kind, question label, candidate label, value)`` for each node and
    edge term, in breakdown order."""
    rows = []
    for c in breakdown.contributions:
        if c.kind in (NODE, EDGE):
            rows.append((c.kind, _label(question, c.question), _label(candidate, c.candidate), c.value))
    return rows
