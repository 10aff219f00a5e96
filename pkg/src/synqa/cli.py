"""Command line front end.

    synqa index --corpus corpus.txt --out corpus.idx
    synqa ask questions.txt --corpus corpus.txt [--explain] [--format tsv]
    synqa eval questions.txt gold.tsv --corpus corpus.txt
    synqa repl --corpus corpus.txt

Settings come from, in increasing priority: built-in defaults, a
``key=value`` config file (``--config`` or $SYNQA_CONFIG), and flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from .corpus import CorpusError, parse_corpus, parse_inline, read_corpus, merge_corpora
from .index import (
    EmptyCorpusError,
    IndexFileError,
    build_index,
    read_index,
    read_weights,
    save_index,
    dump_index,
)
from .matcher import NODE, MatchParams, ParamError
from .qa import (
    DEFAULT_K,
    DEFAULT_THETA,
    AnswerResult,
    NoKeywords,
    QuestionKind,
    answer,
    explain_rows,
    normalize_answer,
)
from .similarity import ResourceError, load_model

CONFIG_ENV = "SYNQA_CONFIG"
FORMATS = ("plain", "tsv", "jsonl")
RESOURCE_KEYS = ("synonyms", "taxonomy", "types", "interrogatives", "units", "weights")
OPTION_KEYS = ("corpus", "index", "k", "theta", "format", "top") + RESOURCE_KEYS

EXIT_OK, EXIT_ERROR = 0, 2


class CliError(Exception):
    pass


def _num(v: float) -> str:
    text = f"{v:.6g}"
    return text if any(ch in text for ch in ".einf") else text + ".0"


# -- configuration -----------------------------------------------------------

@dataclass
class CliConfig:
    corpus: list[str] = field(default_factory=list)
    index: str | None = None
    resources: dict[str, str] = field(default_factory=dict)
    params: MatchParams = field(default_factory=MatchParams)
    k: int = DEFAULT_K
    theta: float = DEFAULT_THETA
    format: str = "plain"
    top: int = 5


def _read_config_file(path: str) -> dict[str, str]:
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}")
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CliError(f"{path}:{lineno}: expected key=value")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def resolve_config(args) -> CliConfig:
    cfg = CliConfig()
    raw: dict[str, str] = {}
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    if path:
        raw = _read_config_file(path)

    param_overrides = {k: v for k, v in raw.items() if k not in OPTION_KEYS}
    for name in ("alpha", "beta", "w_interr", "w_edge", "exact_limit"):
        value = getattr(args, name, None)
        if value is not None:
            param_overrides[name] = str(value)
    if getattr(args, "no_idf_weighting", False):
        param_overrides["idf_weighting"] = "false"
    if getattr(args, "edge_relax", False):
        param_overrides["edge_relax"] = "true"
    try:
        cfg.params = MatchParams().with_overrides(param_overrides)
    except ParamError as e:
        raise CliError(str(e)) from None

    corpus = getattr(args, "corpus", None) or []
    cfg.corpus = list(corpus) or [p for p in raw.get("corpus", "").split(",") if p]
    cfg.index = getattr(args, "index", None) or raw.get("index")
    for key in RESOURCE_KEYS:
        value = getattr(args, key, None) or raw.get(key)
        if value:
            cfg.resources[key] = value
    try:
        cfg.k = int(getattr(args, "k", None) or raw.get("k", DEFAULT_K))
        theta = getattr(args, "theta", None)
        cfg.theta = float(theta if theta is not None else raw.get("theta", DEFAULT_THETA))
        cfg.top = int(getattr(args, "top", None) or raw.get("top", 5))
    except ValueError as e:
        raise CliError(f"bad numeric setting: {e}") from None
    cfg.format = getattr(args, "format", None) or raw.get("format", "plain")
    if cfg.format not in FORMATS:
        raise CliError(f"unknown format {cfg.format!r}")
    if cfg.k < 1:
        raise CliError("k must be >= 1")
    if not 0.0 <= cfg.theta <= 1.0:
        raise CliError("theta must lie in [0, 1]")

    for p in cfg.corpus + ([cfg.index] if cfg.index else []) + list(cfg.resources.values()):
        if not os.path.exists(p):
            raise CliError(f"file not found: {p}")
    return cfg


@dataclass
class Engine:
    config: CliConfig
    corpus: object
    index: object
    model: object
    weights: object

    def ask(self, question) -> AnswerResult:
        c = self.config
        return answer(question, self.corpus, self.index, self.model, c.params, c.k, c.theta,
                      self.weights)


def load_engine(cfg: CliConfig) -> Engine:
    if not cfg.corpus:
        raise CliError("no corpus given (use --corpus)")
    corpus = merge_corpora(read_corpus(p) for p in cfg.corpus)
    if cfg.index:
        index = read_index(cfg.index)
        if index.n != len(corpus) or any(sid not in corpus for ids in index.postings.values()
                                          for sid in ids):
            raise CliError(f"index {cfg.index} was not built from the given corpus")
    else:
        index = build_index(corpus)
    r = cfg.resources
    model = load_model(r.get("synonyms"), r.get("taxonomy"), r.get("types"),
                       r.get("interrogatives"), r.get("units"))
    weights = read_weights(r["weights"], index) if "weights" in r else None
    return Engine(cfg, corpus, index, model, weights)


# -- output ------------------------------------------------------------------

def format_plain(result: AnswerResult, engine: Engine, question, explain: bool) -> str:
    out = [f"{result.question_id} [{result.kind.value}]"]
    if result.kind is QuestionKind.YES_NO:
        out.append(str(result.yesno))
    if not result.answers:
        out.append("no candidate sentences")
    for rank, a in enumerate(result.answers[:engine.config.top], 1):
        if result.kind is QuestionKind.YES_NO:
            label = "best match" if rank == 1 else "match"
        else:
            label = a.text if a.text is not None else "(no answer)"
        out.append(f"{rank}. {label} (score {_num(a.score)}, sent {a.sentence_id})")
        if explain:
            out.extend("   " + line for line in explain_block(question, engine.corpus[a.sentence_id],
                                                             a.breakdown))
    return "\n".join(out)


def explain_block(question, candidate, breakdown) -> list[str]:
    lines = []
    for kind, qlabel, clabel, value in explain_rows(question, candidate, breakdown):
        if value == 0:
            continue
        tag = "" if kind == NODE else " [edge]"
        lines.append(f"Matching between {qlabel} and {clabel}{tag}: {_num(value)}")
    b = breakdown
    lines.append(f"B1={_num(b.b1)} B2={_num(b.b2)} DNUM={b.dnum} alpha={_num(b.alpha)} "
                 f"beta={_num(b.beta)} Score={_num(b.total)}")
    return lines


def tsv_record(result: AnswerResult | NoKeywords, question) -> str:
    if isinstance(result, NoKeywords):
        return "\t".join([question.id, "NO_KEYWORDS", "-", "-", "-"])
    if result.kind is QuestionKind.YES_NO:
        best = result.answers[0].sentence_id if result.answers else "-"
        return "\t".join([result.question_id, result.kind.value, result.yesno.decision, best,
                          repr(result.yesno.normalized)])
    top = result.top
    if top is None:
        return "\t".join([result.question_id, result.kind.value, "-", "-", "-"])
    return "\t".join([result.question_id, result.kind.value, top.text, top.sentence_id,
                      repr(top.score)])


def result_json(result: AnswerResult | NoKeywords, question, engine: Engine,
                explain: bool) -> dict:
    if isinstance(result, NoKeywords):
        return {"question_id": question.id, "kind": "NO_KEYWORDS", "answers": []}
    answers = []
    for rank, a in enumerate(result.answers, 1):
        item = {"rank": rank, "answer": a.text, "sentence_id": a.sentence_id, "score": a.score,
                "answerless": a.answerless and result.kind is not QuestionKind.YES_NO}
        if explain:
            b = a.breakdown
            cand = engine.corpus[a.sentence_id]
            item["alignment"] = list(a.alignment.pairs)
            item["breakdown"] = {
                "b1": b.b1, "b2": b.b2, "dnum": b.dnum, "total": b.total,
                "alpha": b.alpha, "beta": b.beta,
                "contributions": [
                    {"kind": k, "question": q, "candidate": c, "value": v}
                    for k, q, c, v in explain_rows(question, cand, b)
                ],
            }
        answers.append(item)
    record = {"question_id": result.question_id, "kind": result.kind.value, "answers": answers}
    if result.yesno is not None:
        record["yesno"] = {"decision": result.yesno.decision, "normalized": result.yesno.normalized}
    return record


def emit(result, question, engine: Engine, explain: bool, out) -> None:
    fmt = engine.config.format
    if fmt == "tsv":
        print(tsv_record(result, question), file=out)
    elif fmt == "jsonl":
        print(json.dumps(result_json(result, question, engine, explain), ensure_ascii=False), file=out)
    elif isinstance(result, NoKeywords):
        print(f"{question.id}: no keywords in question", file=out)
    else:
        print(format_plain(result, engine, question, explain), file=out)


# -- commands ----------------------------------------------------------------

def _read_questions(path: str):
    if path == "-":
        return parse_corpus(sys.stdin.read(), source="<stdin>")
    if not os.path.exists(path):
        raise CliError(f"file not found: {path}")
    return read_corpus(path)


def cmd_index(args) -> int:
    if not args.corpus:
        raise CliError("no corpus given (use --corpus)")
    for p in args.corpus:
        if not os.path.exists(p):
            raise CliError(f"file not found: {p}")
    corpus = merge_corpora(read_corpus(p) for p in args.corpus)
    index = build_index(corpus)
    if args.out == "-":
        sys.stdout.write(dump_index(index))
    else:
        save_index(index, args.out)
    print(f"sentences={index.n} vocabulary={index.vocabulary_size}",
          file=sys.stderr if args.out == "-" else sys.stdout)
    return EXIT_OK


def cmd_ask(args) -> int:
    cfg = resolve_config(args)
    engine = load_engine(cfg)
    if args.inline:
        questions = [parse_inline(args.question, "q1")]
    else:
        questions = list(_read_questions(args.question))
    stream = open(args.explain_jsonl, "w", encoding="utf-8") if args.explain_jsonl else None
    try:
        for q in questions:
            try:
                result = engine.ask(q)
            except NoKeywords as e:
                result = e
            emit(result, q, engine, args.explain, sys.stdout)
            if stream is not None:
                print(json.dumps(result_json(result, q, engine, True), ensure_ascii=False), file=stream)
    finally:
        if stream is not None:
            stream.close()
    return EXIT_OK


def read_gold(path: str) -> dict[str, str]:
    if not os.path.exists(path):
        raise CliError(f"file not found: {path}")
    gold = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip():
                raise CliError(f"{path}:{lineno}: expected 'question-id<TAB>answer'")
            if parts[0] in gold:
                raise CliError(f"{path}:{lineno}: question id {parts[0]!r} listed twice")
            gold[parts[0].strip()] = parts[1].strip()
    return gold


def cmd_eval(args) -> int:
    cfg = resolve_config(args)
    engine = load_engine(cfg)
    questions = list(_read_questions(args.questions))
    gold = read_gold(args.gold)
    ids = {q.id for q in questions}
    unknown = [qid for qid in gold if qid not in ids]
    if unknown:
        raise CliError(f"gold file names unknown question id(s): {', '.join(unknown)}")

    correct = total = 0
    for q in questions:
        if q.id not in gold:
            print(f"{q.id}\tSKIPPED\tno gold answer")
            continue
        try:
            result = engine.ask(q)
        except NoKeywords:
            predicted = None
        else:
            if result.kind is QuestionKind.YES_NO:
                predicted = result.yesno.decision
            else:
                predicted = result.top.text if result.top else None
        ok = normalize_answer(predicted) == normalize_answer(gold[q.id]) and predicted is not None
        correct += ok
        total += 1
        print(f"{q.id}\t{'correct' if ok else 'incorrect'}\t{predicted or '-'}\t{gold[q.id]}")
    if total == 0:
        print("accuracy 0/0 (no questions)")
    else:
        print(f"accuracy {correct}/{total} = {correct / total:.2f}")
    return EXIT_OK


def cmd_repl(args, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    cfg = resolve_config(args)
    engine = load_engine(cfg)
    counter = 0
    pending: list[str] | None = None

    def run(question):
        try:
            result = engine.ask(question)
        except NoKeywords:
            print(f"{question.id}: no keywords in question", file=stdout)
            return
        emit(result, question, engine, args.explain, stdout)

    for line in stdin:
        line = line.rstrip("\r\n")
        if pending is not None:
            if line.strip():
                pending.append(line)
                continue
            text, pending = "\n".join(pending), None
            try:
                for q in parse_corpus(text):
                    run(q)
            except CorpusError as e:
                print(f"error: {e}", file=stdout)
            continue
        stripped = line.strip()
        if not stripped:
            continue
        if stripped in (":q", ":quit", ":exit"):
            break
        if stripped.startswith(":set"):
            try:
                key, _, value = stripped[4:].strip().partition("=")
                cfg.params = cfg.params.with_overrides({key: value})
                print(f"{key.strip()} = {value.strip()}", file=stdout)
            except ParamError as e:
                print(f"error: {e}", file=stdout)
            continue
        if stripped.startswith(":"):
            print(f"error: unknown directive {stripped.split()[0]}", file=stdout)
            continue
        if stripped.startswith("#sent"):
            pending = [line]
            continue
        counter += 1
        try:
            q = parse_inline(stripped, f"repl-{counter}")
        except CorpusError as e:
            print(f"error: {e}", file=stdout)
            continue
        run(q)
    if pending:
        try:
            for q in parse_corpus("\n".join(pending)):
                run(q)
        except CorpusError as e:
            print(f"error: {e}", file=stdout)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    d = MatchParams()
    p.add_argument("--config", help=f"key=value settings file (default: ${CONFIG_ENV})")
    p.add_argument("--corpus", action="append", help="corpus file; repeatable")
    p.add_argument("--index", help="prebuilt index file (default: build from the corpus)")
    p.add_argument("--synonyms", help="synonym table: lemma<TAB>lemma<TAB>value")
    p.add_argument("--taxonomy", help="indented class tree with '= lemma' lines")
    p.add_argument("--types", help="type lexicon: lemma<TAB>CLASS[,CLASS]")
    p.add_argument("--interrogatives", help="interrogative map: lemma[ noun]<TAB>CLASS "
                   "(default: built-in romanized Japanese table)")
    p.add_argument("--units", help="unit rules: POS<TAB>unit-lemma<TAB>CLASS (default: NUM nen TIME_YEAR)")
    p.add_argument("--weights", help="lemma<TAB>weight table overriding corpus IDF in matching")
    p.add_argument("--alpha", type=float, help=f"edge term weight (default: {d.alpha})")
    p.add_argument("--beta", type=float, help=f"length penalty per chunk (default: {d.beta})")
    p.add_argument("--w-interr", dest="w_interr", type=float,
                   help=f"interrogative type-match score (default: {d.w_interr})")
    p.add_argument("--w-edge", dest="w_edge", type=float,
                   help=f"edge similarity scale (default: {d.w_edge})")
    p.add_argument("--exact-limit", dest="exact_limit", type=int,
                   help=f"largest question x candidate size searched exactly (default: {d.exact_limit})")
    p.add_argument("--no-idf-weighting", action="store_true", help="weight every lemma 1.0")
    p.add_argument("--edge-relax", action="store_true",
                   help="let edge terms match a grandparent head as well")
    p.add_argument("--k", type=int, help=f"candidates retrieved per question (default: {DEFAULT_K})")
    p.add_argument("--theta", type=float,
                   help=f"YES threshold on the normalized score (default: {DEFAULT_THETA})")
    p.add_argument("--top", type=int, help="answers shown per question in plain format (default: 5)")
    p.add_argument("--format", choices=FORMATS, help="output format (default: plain)")
    p.add_argument("--explain", action="store_true", help="print the score ledger for each answer")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synqa", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and save the IDF index")
    p.add_argument("--corpus", action="append", help="corpus file; repeatable")
    p.add_argument("--out", required=True, help="index file to write ('-' for stdout)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("ask", help="answer questions")
    p.add_argument("question", help="question file in corpus format ('-' for stdin), "
                   "or the question itself with --inline")
    p.add_argument("--inline", action="store_true", help="QUESTION is in the one-line form")
    p.add_argument("--explain-jsonl", help="also write full score breakdowns here as JSON lines")
    _add_common(p)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("eval", help="score answers against a gold file")
    p.add_argument("questions", help="question file in corpus format")
    p.add_argument("gold", help="gold answers: question-id<TAB>answer")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("repl", help="interactive question loop")
    _add_common(p)
    p.set_defaults(func=cmd_repl)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, CorpusError, ResourceError, IndexFileError, EmptyCorpusError, ParamError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
