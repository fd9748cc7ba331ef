"""Command-line interface: ``fuzzyqa index|ask|sim|expand|cluster``."""

import argparse
import json
import logging
import sys
import warnings

import numpy as np

from fuzzyqa.cocluster import VARIANTS, CoClusterConfig, fit, load_matrix
from fuzzyqa.engine import (
    DEFAULT_THRESHOLD,
    DEFAULT_TOP_K,
    Corpus,
    answer,
    index_corpus,
    load_index,
    save_index,
)
from fuzzyqa.exceptions import EmptyQuestionError, FuzzyQAError
from fuzzyqa.fuzzyscale import load_sense_bank
from fuzzyqa.ontology import SimilarityParams, load_taxonomy
from fuzzyqa.textprep import TextPipeline
from fuzzyqa.thesaurus import DEFAULT_CAP, expand_query, load_thesaurus


def _read(path):
    with open(path, encoding="utf-8") as f:
        return f.read()


def _taxonomy(path):
    return load_taxonomy(_read(path), source=path)


def _thesaurus(path):
    return load_thesaurus(_read(path), source=path)


def _text(args):
    return TextPipeline.from_files(args.stoplist, args.lexicon)


def _dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def cmd_index(args):
    corpus = Corpus.from_directory(args.corpus)
    taxonomy = _taxonomy(args.taxonomy)
    thesaurus = _thesaurus(args.thesaurus)
    config = CoClusterConfig(
        n_clusters=args.clusters,
        variant=args.variant,
        tu=args.tu,
        tv=args.tv,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=args.seed,
    )
    index = index_corpus(corpus, taxonomy, thesaurus, config, SimilarityParams(args.x, args.y), _text(args))
    with open(args.out, "w", encoding="utf-8") as f:
        save_index(index, f)
    n, m = index.matrix.shape
    print(f"documents: {n}")
    print(f"vocabulary: {m}")
    print(f"clusters: {config.n_clusters}")
    print(f"iterations: {index.model.iterations_run}")
    print(f"converged: {str(index.model.converged).lower()}")
    if index.matrix.pruned_docs:
        print(f"pruned documents: {' '.join(map(str, index.matrix.pruned_docs))}")
    return 0


def _format_answers_table(answers, explain):
    if not answers:
        return ["no answers"]
    lines = [f"{'rank':<5} {'doc':>5} {'score':>8}  title"]
    for r, a in enumerate(answers, start=1):
        lines.append(f"{r:<5} {a.doc_id:>5} {a.score:>8.4f}  {a.title}")
        if explain:
            lines.append(f"      cluster={a.cluster} doc_mu={a.doc_mu:.4f}")
            for lemma, s in a.breakdown.items():
                lines.append(f"      sim[{lemma}]={s:.6f}")
            for kw, band in a.word_intervals.items():
                sense = a.senses.get(kw)
                extra = f" sense={sense}" if sense else ""
                lines.append(f"      word[{kw}]=[{band.lower:.4f}, {band.upper:.4f}]{extra}")
    return lines


def cmd_ask(args):
    taxonomy = _taxonomy(args.taxonomy)
    thesaurus = _thesaurus(args.thesaurus)
    senses = load_sense_bank(_read(args.senses), source=args.senses)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        with open(args.index, encoding="utf-8") as f:
            index = load_index(f, taxonomy, thesaurus)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    answers = answer(
        args.question,
        index,
        taxonomy,
        thesaurus,
        senses,
        SimilarityParams(args.x, args.y),
        k=args.top,
        threshold=args.threshold,
        cap=args.cap,
        keyword_only=args.keyword_only,
        text=_text(args),
    )
    if args.format == "json":
        print(_dump_json({"question": args.question, "answers": [a.to_dict() for a in answers]}))
    else:
        print("\n".join(_format_answers_table(answers, args.explain)))
    return 0


def cmd_sim(args):
    taxonomy = _taxonomy(args.taxonomy)
    t1, t2 = args.term1.lower(), args.term2.lower()
    params = SimilarityParams(args.x, args.y)
    S = taxonomy.shortest_path(t1, t2)
    value = taxonomy.similarity(t1, t2, params)
    print(f"d={taxonomy.depth}")
    print(f"S={S}")
    print(f"St={value:.6f}")
    return 0


def cmd_expand(args):
    thesaurus = _thesaurus(args.thesaurus)
    keywords = _text(args).keywords(args.question, thesaurus.lemmas())
    if not keywords:
        raise EmptyQuestionError(f"no keywords left in question {args.question!r}")
    print("keywords: " + " ".join(kw.lemma for kw in keywords))
    for variant in expand_query(keywords, thesaurus, args.cap):
        print(" ".join(variant))
    return 0


def _format_row(values):
    return " ".join(f"{v:.6f}" for v in values)


def cmd_cluster(args):
    with open(args.matrix, encoding="utf-8") as f:
        A = load_matrix(f, source=args.matrix)
    config = CoClusterConfig(
        n_clusters=args.clusters,
        variant=args.variant,
        tu=args.tu,
        tv=args.tv,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=args.seed,
    )
    model = fit(A, config)
    print(f"variant: {config.variant}")
    print(f"iterations: {model.iterations_run}")
    print(f"converged: {str(model.converged).lower()}")
    print(f"clip events: {model.clip_events}")
    print("objective: " + " ".join(f"{v:.6f}" for v in model.objective_trace))
    print("document memberships (cluster rows):")
    for c, row in enumerate(model.U):
        print(f"  c{c}: {_format_row(row)}")
    print("document clusters: " + " ".join(str(int(c)) for c in np.argmax(model.U, axis=0)))
    print("word memberships (cluster rows):")
    for c, row in enumerate(model.V):
        print(f"  c{c}: {_format_row(row)}")
    return 0


def _add_text_options(p):
    p.add_argument("--stoplist", help="stop-word file (default: bundled or $FUZZYQA_DATA)")
    p.add_argument("--lexicon", help="tag lexicon file (default: bundled or $FUZZYQA_DATA)")


def _add_similarity_options(p):
    p.add_argument("--x", type=float, default=0.5, help="depth smoothing factor")
    p.add_argument("--y", type=float, default=0.6, help="path smoothing factor")


def _add_cluster_options(p):
    p.add_argument("--variant", choices=VARIANTS, default="fccstf")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tu", type=float, default=1.0)
    p.add_argument("--tv", type=float, default=1.0)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-7)


def build_parser():
    parser = argparse.ArgumentParser(prog="fuzzyqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="index a directory of .txt documents")
    p.add_argument("--corpus", required=True)
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--thesaurus", required=True)
    p.add_argument("--clusters", type=int, default=2)
    p.add_argument("--out", required=True)
    _add_cluster_options(p)
    _add_similarity_options(p)
    _add_text_options(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("ask", help="answer a question against an index")
    p.add_argument("--index", required=True)
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--thesaurus", required=True)
    p.add_argument("--senses", required=True)
    p.add_argument("--top", type=int, default=DEFAULT_TOP_K)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--explain", action="store_true")
    p.add_argument("--keyword-only", action="store_true", help="exact conjunctive keyword match, no ontology")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("question")
    _add_similarity_options(p)
    _add_text_options(p)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("sim", help="edge-count similarity of two taxonomy terms")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("term1")
    p.add_argument("term2")
    _add_similarity_options(p)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("expand", help="preview synonym expansion of a question")
    p.add_argument("--thesaurus", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("question")
    _add_text_options(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("cluster", help="co-cluster a matrix file and print diagnostics")
    p.add_argument("--matrix", required=True)
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--explain", action="store_true", help="log clipping events to stderr")
    _add_cluster_options(p)
    p.set_defaults(func=cmd_cluster)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log = logging.getLogger("fuzzyqa")
    log.addHandler(handler)
    log.setLevel(logging.INFO if getattr(args, "explain", False) else logging.WARNING)
    try:
        return args.func(args)
    except (FuzzyQAError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
