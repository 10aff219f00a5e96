"""Question answering by matching dependency structure.

Candidate sentences are retrieved by keyword IDF, each is aligned chunk by
chunk with the question to maximise a node + edge - length score, and the
chunk paired with the interrogative is returned as the answer.
"""

from .corpus import Bunsetsu, Corpus, CorpusError, Sentence, Token, parse_corpus, read_corpus
from .index import IdfIndex, WeightTable, build_index, retrieve
from .matcher import Alignment, MatchParams, ScoreBreakdown, best_alignment, score_alignment
from .qa import AnswerResult, NoKeywords, QuestionKind, answer, classify_question
from .similarity import SimilarityModel, load_model

__version__ = "0.1.0"
