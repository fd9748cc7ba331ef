"""
Question answering pipeline.

Indexing extracts keywords from every document, builds a tf-idf matrix and
fits a fuzzy co-clustering.  Answering a question runs:

1. tokenize, drop stop words, tag, extract keywords
2. expand the keywords into synonym variants
3. for each variant, build the keyword x document answer matrix of
   ontology similarities and keep the variant with the best-matched document
4. gate candidates on a similarity threshold
5. score each candidate on the fuzzy scale and rank
"""

import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from fuzzyqa.cocluster import (
    CoClusterConfig,
    CoClusterModel,
    TermDocMatrix,
    assign_cluster,
    build_matrix,
    fit,
)
from fuzzyqa.exceptions import EmptyQuestionError, FuzzyQAError, IndexFormatError, StaleIndexWarning
from fuzzyqa.fuzzyscale import ScoredAnswer, SenseBank, rank, score, word_membership
from fuzzyqa.ontology import SimilarityParams, edge_count_similarity, term_to_concept
from fuzzyqa.textprep import TextPipeline
from fuzzyqa.thesaurus import DEFAULT_CAP, expand_query

INDEX_FORMAT_VERSION = 1
DEFAULT_THRESHOLD = 0.3
DEFAULT_TOP_K = 10


@dataclass(frozen=True)
class Document:
    doc_id: int
    title: str
    body: str


class Corpus:
    def __init__(self, documents):
        self.documents = tuple(documents)
        seen = set()
        for doc in self.documents:
            if not isinstance(doc.doc_id, int) or doc.doc_id < 0:
                raise FuzzyQAError(f"document id must be a nonnegative integer: {doc.doc_id!r}")
            if doc.doc_id in seen:
                raise FuzzyQAError(f"duplicate document id {doc.doc_id}")
            if not doc.body.strip():
                raise FuzzyQAError(f"document {doc.doc_id} ({doc.title!r}) is empty")
            seen.add(doc.doc_id)

    @classmethod
    def from_texts(cls, texts, titles=None):
        titles = titles or [f"doc{i}" for i in range(len(texts))]
        return cls(Document(i, t, b) for i, (t, b) in enumerate(zip(titles, texts)))

    @classmethod
    def from_directory(cls, path):
        """One document per ``*.txt`` file, ids assigned in file-name order."""
        names = sorted(n for n in os.listdir(path) if n.endswith(".txt"))
        docs = []
        for i, name in enumerate(names):
            with open(os.path.join(path, name), encoding="utf-8") as f:
                docs.append(Document(i, name[: -len(".txt")], f.read()))
        return cls(docs)

    def __iter__(self):
        return iter(self.documents)

    def __len__(self):
        return len(self.documents)


@dataclass(eq=False)
class Index:
    matrix: TermDocMatrix
    model: CoClusterModel
    titles: dict
    fingerprint: dict = field(default_factory=dict)

    def __post_init__(self):
        n, m = self.matrix.shape
        if self.model.U.shape[1] != n or self.model.V.shape[1] != m:
            raise FuzzyQAError("co-clustering model does not match the term-document matrix")

    @property
    def doc_ids(self):
        return self.matrix.doc_ids

    def __eq__(self, other):
        if not isinstance(other, Index):
            return NotImplemented
        return (
            self.matrix == other.matrix
            and self.model == other.model
            and self.titles == other.titles
            and self.fingerprint == other.fingerprint
        )


@dataclass(eq=False)
class AnswerMatrix:
    """Ontology similarity of each query keyword (rows) against each document (columns)."""

    keywords: tuple
    doc_ids: tuple
    cells: np.ndarray

    def column_sums(self):
        return self.cells.sum(axis=0)


def _known_terms(taxonomy, thesaurus):
    known = set(taxonomy.concepts)
    if thesaurus is not None:
        known.update(thesaurus.lemmas())
    return known


def index_corpus(corpus, taxonomy, thesaurus, config=CoClusterConfig(), params=SimilarityParams(), text=None):
    if len(corpus) == 0:
        raise FuzzyQAError("cannot index an empty corpus")
    text = text or TextPipeline.default()
    known = _known_terms(taxonomy, thesaurus)
    streams = [(doc.doc_id, text.keyword_stream(doc.body, known)) for doc in corpus]
    matrix = build_matrix(streams)
    model = fit(matrix, config)
    fingerprint = {
        "variant": config.variant,
        "n_clusters": config.n_clusters,
        "seed": config.seed,
        "tu": config.tu,
        "tv": config.tv,
        "max_iter": config.max_iter,
        "tol": config.tol,
        "x": params.x,
        "y": params.y,
        "taxonomy_sha256": taxonomy.digest,
        "thesaurus_sha256": thesaurus.digest if thesaurus is not None else "",
        "text_sha256": text.digest,
    }
    titles = {doc.doc_id: doc.title for doc in corpus}
    return Index(matrix, model, titles, fingerprint)


class _Similarity:
    """Per-query cache of concept resolution and pairwise similarity."""

    def __init__(self, index, taxonomy, thesaurus, params):
        self.taxonomy = taxonomy
        self.thesaurus = thesaurus
        self.params = params
        self.doc_terms = [set(index.matrix.doc_terms(i)) for i in range(index.matrix.shape[0])]
        self.doc_concepts = [
            sorted({c for t in terms if (c := term_to_concept(t, taxonomy, thesaurus)) is not None})
            for terms in self.doc_terms
        ]
        self._pair = {}

    def concepts(self, a, b):
        if a == b:
            return 1.0
        key = (a, b) if a < b else (b, a)
        if key not in self._pair:
            self._pair[key] = edge_count_similarity(
                self.taxonomy.depth, self.taxonomy.shortest_path(a, b), self.params
            )
        return self._pair[key]

    def row(self, lemma):
        concept = term_to_concept(lemma, self.taxonomy, self.thesaurus)
        out = np.zeros(len(self.doc_terms))
        for i, (terms, concepts) in enumerate(zip(self.doc_terms, self.doc_concepts)):
            if lemma in terms:
                out[i] = 1.0
            elif concept is not None and concepts:
                out[i] = max(self.concepts(concept, c) for c in concepts)
        return out


def build_answer_matrix(variant, index, taxonomy, thesaurus, params=SimilarityParams(), _sim=None):
    """
    Keyword x document similarity grid for one query variant.

    A cell is 1 when the document contains the keyword itself, otherwise the
    best similarity between the keyword's concept and any of the document's
    concepts, and 0 when either side has no concept.
    """
    sim = _sim or _Similarity(index, taxonomy, thesaurus, params)
    cells = np.array([sim.row(lemma) for lemma in variant]).reshape(len(variant), len(index.doc_ids))
    return AnswerMatrix(tuple(variant), index.doc_ids, cells)


def keyword_only_matrix(keywords, index):
    """Exact conjunctive baseline: 1 where a document contains every keyword, else 0."""
    n = index.matrix.shape[0]
    cells = np.zeros((len(keywords), n))
    for i in range(n):
        terms = set(index.matrix.doc_terms(i))
        if all(k in terms for k in keywords):
            cells[:, i] = 1.0
    return AnswerMatrix(tuple(keywords), index.doc_ids, cells)


def select_variant(matrices):
    """Index of the variant whose best document has the largest similarity sum; earliest on ties."""
    best, best_value = 0, -np.inf
    for v, am in enumerate(matrices):
        value = am.column_sums().max() if am.cells.size else 0.0
        if value > best_value:
            best, best_value = v, value
    return best


def answer(
    question,
    index,
    taxonomy,
    thesaurus,
    sense_bank=None,
    params=SimilarityParams(),
    k=DEFAULT_TOP_K,
    threshold=DEFAULT_THRESHOLD,
    cap=DEFAULT_CAP,
    keyword_only=False,
    text=None,
):
    """
    Ranked answers to ``question``.

    Returns at most ``k`` :class:`ScoredAnswer` objects, best first.  An
    empty list means no document passed the similarity threshold.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    text = text or TextPipeline.default()
    sense_bank = sense_bank or SenseBank()
    keywords = text.keywords(question, _known_terms(taxonomy, thesaurus))
    if not keywords:
        raise EmptyQuestionError(f"no keywords left in question {question!r}")
    originals = [kw.lemma for kw in keywords]

    if keyword_only:
        am = keyword_only_matrix(originals, index)
    else:
        sim = _Similarity(index, taxonomy, thesaurus, params)
        matrices = [
            build_answer_matrix(v, index, taxonomy, thesaurus, params, _sim=sim)
            for v in expand_query(keywords, thesaurus, cap)
        ]
        am = matrices[select_variant(matrices)]

    candidates = np.flatnonzero((am.cells >= threshold).any(axis=0)) if am.cells.size else []
    n_candidates = len(candidates)
    bands = {kw: word_membership(kw, keywords, sense_bank) for kw in originals}
    scored = []
    for col in candidates:
        cluster = assign_cluster(index.model, col)
        doc_mu = float(index.model.U[cluster, col])
        intervals = {
            kw: bands[kw][0].scaled(float(am.cells[slot, col])) for slot, kw in enumerate(originals)
        }
        doc_id = index.doc_ids[col]
        scored.append(
            ScoredAnswer(
                doc_id=doc_id,
                score=score(doc_mu, list(intervals.values()), n_candidates),
                cluster=cluster,
                breakdown={lemma: float(am.cells[slot, col]) for slot, lemma in enumerate(am.keywords)},
                title=index.titles.get(doc_id, ""),
                doc_mu=doc_mu,
                word_intervals=intervals,
                senses={kw: s.label for kw, (_, s) in bands.items() if s is not None},
            )
        )
    return rank(scored)[:k]


def _index_to_dict(index):
    m = index.model
    return {
        "version": INDEX_FORMAT_VERSION,
        "fingerprint": index.fingerprint,
        "vocabulary": list(index.matrix.vocabulary),
        "documents": [[d, index.titles[d]] for d in sorted(index.titles)],
        "indexed_documents": list(index.matrix.doc_ids),
        "pruned_documents": list(index.matrix.pruned_docs),
        "pruned_words": list(index.matrix.pruned_words),
        "matrix": index.matrix.weights.tolist(),
        "U": m.U.tolist(),
        "V": m.V.tolist(),
        "objective_trace": [float(v) for v in m.objective_trace],
        "iterations_run": m.iterations_run,
        "converged": m.converged,
        "clip_events": m.clip_events,
    }


def save_index(index, stream):
    stream.write(json.dumps(_index_to_dict(index), indent=1, ensure_ascii=False))
    stream.write("\n")


def load_index(stream, taxonomy=None, thesaurus=None):
    """
    Read an index written by :func:`save_index`.

    When ``taxonomy`` or ``thesaurus`` are given, a :class:`StaleIndexWarning`
    is issued if their digests differ from the ones the index was built with.
    """
    try:
        data = json.loads(stream.read())
    except json.JSONDecodeError as exc:
        raise IndexFormatError(f"malformed index: {exc}") from None
    if not isinstance(data, dict) or "version" not in data:
        raise IndexFormatError("not a fuzzyqa index")
    if data["version"] != INDEX_FORMAT_VERSION:
        raise IndexFormatError(
            f"unsupported index version {data['version']!r} (expected {INDEX_FORMAT_VERSION})"
        )
    try:
        n_docs = len(data["indexed_documents"])
        n_words = len(data["vocabulary"])
        weights = np.array(data["matrix"], dtype=np.float64).reshape(n_docs, n_words)
        matrix = TermDocMatrix(
            weights,
            data["indexed_documents"],
            data["vocabulary"],
            tuple(data["pruned_documents"]),
            tuple(data["pruned_words"]),
        )
        U = np.array(data["U"], dtype=np.float64).reshape(-1, n_docs)
        V = np.array(data["V"], dtype=np.float64).reshape(U.shape[0], n_words)
        model = CoClusterModel(
            U,
            V,
            list(data["objective_trace"]),
            int(data["iterations_run"]),
            bool(data["converged"]),
            int(data["clip_events"]),
        )
        titles = {int(d): str(t) for d, t in data["documents"]}
        index = Index(matrix, model, titles, dict(data["fingerprint"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexFormatError(f"malformed index: {exc}") from None
    _check_digests(index, taxonomy, thesaurus)
    return index


def _check_digests(index, taxonomy, thesaurus):
    fp = index.fingerprint
    for name, obj, key in (("taxonomy", taxonomy, "taxonomy_sha256"), ("thesaurus", thesaurus, "thesaurus_sha256")):
        if obj is not None and obj.digest and fp.get(key) and fp[key] != obj.digest:
            warnings.warn(f"index was built with a different {name} file", StaleIndexWarning, stacklevel=3)


class SemanticQA(BaseEstimator):
    """
    Estimator wrapper around indexing and answering.

    ``fit`` indexes a corpus (a :class:`Corpus` or a list of strings);
    ``answer`` returns ranked :class:`ScoredAnswer` objects for one
    question and ``predict`` the top document id per question (-1 when
    nothing passes the threshold).
    """

    def __init__(
        self,
        taxonomy=None,
        thesaurus=None,
        sense_bank=None,
        text=None,
        n_clusters=2,
        variant="fccstf",
        tu=1.0,
        tv=1.0,
        max_iter=200,
        tol=1e-7,
        random_state=0,
        x=0.5,
        y=0.6,
        threshold=DEFAULT_THRESHOLD,
        top_k=DEFAULT_TOP_K,
        cap=DEFAULT_CAP,
        keyword_only=False,
    ):
        self.taxonomy = taxonomy
        self.thesaurus = thesaurus
        self.sense_bank = sense_bank
        self.text = text
        self.n_clusters = n_clusters
        self.variant = variant
        self.tu = tu
        self.tv = tv
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.x = x
        self.y = y
        self.threshold = threshold
        self.top_k = top_k
        self.cap = cap
        self.keyword_only = keyword_only

    def fit(self, X, y=None):
        if self.taxonomy is None:
            raise ValueError("SemanticQA needs a taxonomy")
        corpus = X if isinstance(X, Corpus) else Corpus.from_texts(list(X))
        config = CoClusterConfig(
            self.n_clusters, self.variant, self.tu, self.tv, self.max_iter, self.tol, self.random_state
        )
        self.index_ = index_corpus(
            corpus, self.taxonomy, self.thesaurus, config, SimilarityParams(self.x, self.y), self.text
        )
        return self

    def answer(self, question):
        check_is_fitted(self, "index_")
        return answer(
            question,
            self.index_,
            self.taxonomy,
            self.thesaurus,
            self.sense_bank,
            SimilarityParams(self.x, self.y),
            k=self.top_k,
            threshold=self.threshold,
            cap=self.cap,
            keyword_only=self.keyword_only,
            text=self.text,
        )

    def predict(self, X):
        out = []
        for question in X:
            answers = self.answer(question)
            out.append(answers[0].doc_id if answers else -1)
        return np.array(out, dtype=np.int64)
