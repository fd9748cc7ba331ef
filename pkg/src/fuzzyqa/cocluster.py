"""
Fuzzy co-clustering of a document-term matrix.

Documents and words are clustered simultaneously.  ``U`` (clusters x docs)
holds document memberships, each document's column summing to 1 over
clusters; ``V`` (clusters x words) holds word memberships, each cluster's
row summing to 1 over words.  All variants maximize

    J = sum_c sum_i sum_j u_ci v_cj a_ij  -  fuzzifier(U, V)

by alternating updates, differing only in the fuzzifier:

``fccm``
    entropy on both sides: ``Tu sum u ln u + Tv sum v ln v``.  Updates are
    softmaxes, evaluated in max-shifted form so they cannot overflow.
``codok``
    Gini (quadratic) on both sides: ``Tu sum u^2 + Tv sum v^2``.  The
    closed-form updates are linear and may go negative; negatives are
    clipped to zero and the rest rescaled to sum to 1.
``fccstf``
    a single quadratic term on the word side, ``Tv sum v^2``.  The document
    update is the exact maximizer of a linear function over the simplex
    (mass split evenly over tied best clusters).  The word update clips the
    linear rule at zero and renormalizes by shifting, which is the exact
    Euclidean projection onto the simplex, so J never decreases.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import xlogy
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_non_negative

from fuzzyqa.exceptions import FuzzyQAError, ParseError

logger = logging.getLogger(__name__)

VARIANTS = ("fccm", "codok", "fccstf")
_VARIANT_ALIASES = {"fcc_stf": "fccstf", "fcc-stf": "fccstf", "fuzzy_codok": "codok"}


def normalize_variant(name):
    v = str(name).lower()
    v = _VARIANT_ALIASES.get(v, v)
    if v not in VARIANTS:
        raise ValueError(f"unknown variant {name!r}; expected one of {', '.join(VARIANTS)}")
    return v


@dataclass(eq=False)
class TermDocMatrix:
    """Nonnegative documents x words weight matrix with its row and column labels."""

    weights: np.ndarray
    doc_ids: tuple
    vocabulary: tuple
    pruned_docs: tuple = ()
    pruned_words: tuple = ()

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.doc_ids = tuple(self.doc_ids)
        self.vocabulary = tuple(self.vocabulary)
        if self.weights.shape != (len(self.doc_ids), len(self.vocabulary)):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match "
                f"{len(self.doc_ids)} docs x {len(self.vocabulary)} words"
            )

    @property
    def shape(self):
        return self.weights.shape

    def doc_terms(self, row):
        """Words with a nonzero weight in document ``row``."""
        return [self.vocabulary[j] for j in np.flatnonzero(self.weights[row])]

    def __eq__(self, other):
        if not isinstance(other, TermDocMatrix):
            return NotImplemented
        return (
            self.doc_ids == other.doc_ids
            and self.vocabulary == other.vocabulary
            and self.pruned_docs == other.pruned_docs
            and self.pruned_words == other.pruned_words
            and np.array_equal(self.weights, other.weights)
        )


def build_matrix(streams, vocabulary=None):
    """
    Build a tf-idf weighted matrix from per-document keyword streams.

    Parameters
    ----------
    streams : sequence of (doc_id, list of str)
        Keyword lemmas per document, repeats included.
    vocabulary : iterable of str, optional
        Column words; defaults to the sorted union of all streams.

    Returns
    -------
    TermDocMatrix
        ``tf * ln(1 + n / df)`` weights, with all-zero rows and columns
        removed and listed in ``pruned_docs`` / ``pruned_words``.
    """
    streams = list(streams)
    if not streams:
        raise FuzzyQAError("cannot build a matrix from an empty corpus")
    if vocabulary is None:
        vocabulary = sorted({w for _, words in streams for w in words})
    vocabulary = list(vocabulary)
    col = {w: j for j, w in enumerate(vocabulary)}
    tf = np.zeros((len(streams), len(vocabulary)))
    for i, (_, words) in enumerate(streams):
        for w in words:
            j = col.get(w)
            if j is not None:
                tf[i, j] += 1.0
    n = len(streams)
    df = np.count_nonzero(tf, axis=0)
    with np.errstate(divide="ignore"):
        idf = np.where(df > 0, np.log1p(n / np.maximum(df, 1)), 0.0)
    weights = tf * idf

    keep_rows = weights.any(axis=1)
    keep_cols = weights.any(axis=0)
    doc_ids = [d for d, _ in streams]
    pruned_docs = tuple(d for d, k in zip(doc_ids, keep_rows) if not k)
    pruned_words = tuple(w for w, k in zip(vocabulary, keep_cols) if not k)
    if pruned_docs or pruned_words:
        logger.warning(
            "pruned %d empty documents and %d unused words", len(pruned_docs), len(pruned_words)
        )
    return TermDocMatrix(
        weights[np.ix_(keep_rows, keep_cols)],
        [d for d, k in zip(doc_ids, keep_rows) if k],
        [w for w, k in zip(vocabulary, keep_cols) if k],
        pruned_docs,
        pruned_words,
    )


def dump_matrix(weights, stream):
    weights = np.asarray(weights, dtype=np.float64)
    n, m = weights.shape
    stream.write(f"{n} {m}\n")
    for row in weights:
        stream.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_matrix(stream, source=None):
    """Read the ``n m`` header plus ``n`` rows of ``m`` numbers."""
    lines = [ln for ln in stream.read().splitlines()]
    if not lines:
        raise ParseError("empty matrix file", 1, source)
    try:
        n, m = (int(t) for t in lines[0].split())
    except ValueError:
        raise ParseError("header must be 'n m'", 1, source) from None
    if n < 1 or m < 1:
        raise ParseError("matrix must have at least one row and column", 1, source)
    rows = []
    for lineno in range(2, n + 2):
        if lineno - 1 >= len(lines):
            raise ParseError(f"expected {n} rows, found {len(rows)}", lineno, source)
        try:
            row = [float(t) for t in lines[lineno - 1].split()]
        except ValueError:
            raise ParseError("non-numeric entry", lineno, source) from None
        if len(row) != m:
            raise ParseError(f"expected {m} values, found {len(row)}", lineno, source)
        if any(v < 0 or not np.isfinite(v) for v in row):
            raise ParseError("entries must be finite and nonnegative", lineno, source)
        rows.append(row)
    return np.array(rows, dtype=np.float64)


@dataclass(frozen=True)
class CoClusterConfig:
    n_clusters: int = 2
    variant: str = "fccstf"
    tu: float = 1.0
    tv: float = 1.0
    max_iter: int = 200
    tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", normalize_variant(self.variant))
        if int(self.n_clusters) != self.n_clusters or self.n_clusters < 1:
            raise ValueError("n_clusters must be a positive integer")
        if not (self.tu > 0 and self.tv > 0):
            raise ValueError("fuzzifier weights tu and tv must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")
        if not self.tol >= 0:
            raise ValueError("tol must be nonnegative")


@dataclass(eq=False)
class CoClusterModel:
    U: np.ndarray
    V: np.ndarray
    objective_trace: list = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False
    clip_events: int = 0

    def __eq__(self, other):
        if not isinstance(other, CoClusterModel):
            return NotImplemented
        return (
            np.array_equal(self.U, other.U)
            and np.array_equal(self.V, other.V)
            and list(self.objective_trace) == list(other.objective_trace)
            and self.iterations_run == other.iterations_run
            and self.converged == other.converged
            and self.clip_events == other.clip_events
        )

    @property
    def n_clusters(self):
        return self.U.shape[0]


def _softmax(Z, axis):
    Z = Z - Z.max(axis=axis, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=axis, keepdims=True)


def _clip_rescale(raw, axis):
    out = np.clip(raw, 0.0, None)
    return out / out.sum(axis=axis, keepdims=True)


def project_simplex(raw, axis):
    """Euclidean projection of each slice along ``axis`` onto the probability simplex."""
    X = np.moveaxis(np.asarray(raw, dtype=np.float64), axis, -1)
    k = X.shape[-1]
    srt = -np.sort(-X, axis=-1)
    css = np.cumsum(srt, axis=-1) - 1.0
    ks = np.arange(1, k + 1)
    cond = srt - css / ks > 0
    rho = k - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1)
    return np.moveaxis(np.maximum(X - theta, 0.0), -1, axis)


def _linear_gini(S, T, axis):
    # stationary point of  s.u - T*|u|^2  subject to sum(u) = 1
    k = S.shape[axis]
    return 1.0 / k + (S - S.mean(axis=axis, keepdims=True)) / (2.0 * T)


def _crisp(S):
    best = S == S.max(axis=0, keepdims=True)
    return best / best.sum(axis=0, keepdims=True)


def doc_update(A, V, config, stats=None):
    """New U (clusters x docs) given word memberships V."""
    S = V @ A.T
    if config.variant == "fccm":
        return _softmax(S / config.tu, axis=0)
    if config.variant == "fccstf":
        return _crisp(S)
    raw = _linear_gini(S, config.tu, axis=0)
    _note_clip(raw, "document", stats)
    return _clip_rescale(raw, axis=0)


def word_update(A, U, config, stats=None):
    """New V (clusters x words) given document memberships U."""
    T = U @ A
    if config.variant == "fccm":
        return _softmax(T / config.tv, axis=1)
    raw = _linear_gini(T, config.tv, axis=1)
    _note_clip(raw, "word", stats)
    if config.variant == "codok":
        return _clip_rescale(raw, axis=1)
    return project_simplex(raw, axis=1)


def _note_clip(raw, side, stats):
    n_neg = int(np.count_nonzero(raw < 0))
    if not n_neg:
        return
    if stats is not None:
        stats["clip_events"] += 1
        stats["negative_values"] += n_neg
    logger.info(
        "clipped %d negative raw %s-membership values (min %.6g) and renormalized",
        n_neg,
        side,
        float(raw.min()),
    )


def objective(model, A, config):
    """Variant objective J for the memberships in ``model``."""
    A = np.asarray(getattr(A, "weights", A), dtype=np.float64)
    U, V = model.U, model.V
    C = U.shape[0]
    if U.shape != (C, A.shape[0]) or V.shape != (C, A.shape[1]):
        raise ValueError(
            f"model shapes U{U.shape}, V{V.shape} do not match matrix {A.shape}"
        )
    coupling = float(np.sum(U * (V @ A.T)))
    if config.variant == "fccm":
        return coupling - config.tu * float(xlogy(U, U).sum()) - config.tv * float(xlogy(V, V).sum())
    word_term = config.tv * float(np.sum(V * V))
    if config.variant == "codok":
        return coupling - config.tu * float(np.sum(U * U)) - word_term
    return coupling - word_term


def initial_memberships(n_docs, n_words, config):
    rng = np.random.default_rng(config.seed)
    U = rng.random((config.n_clusters, n_docs))
    U /= U.sum(axis=0, keepdims=True)
    V = np.full((config.n_clusters, n_words), 1.0 / n_words)
    return U, V


def fit(matrix, config):
    """
    Run alternating optimization and return a :class:`CoClusterModel`.

    Each sweep updates word memberships from the current document
    memberships, then document memberships from the new word memberships.
    Stops when the objective changes by less than ``config.tol``.
    """
    A = _check_matrix(getattr(matrix, "weights", matrix))
    n, m = A.shape
    if config.n_clusters > n:
        raise FuzzyQAError(f"n_clusters={config.n_clusters} exceeds document count {n}")
    U, V = initial_memberships(n, m, config)
    stats = {"clip_events": 0, "negative_values": 0}
    model = CoClusterModel(U, V)
    trace = [objective(model, A, config)]
    converged = False
    it = 0
    while it < config.max_iter:
        it += 1
        V = word_update(A, U, config, stats)
        U = doc_update(A, V, config, stats)
        model.U, model.V = U, V
        trace.append(objective(model, A, config))
        if abs(trace[-1] - trace[-2]) < config.tol:
            converged = True
            break
    model.objective_trace = trace
    model.iterations_run = it
    model.converged = converged
    model.clip_events = stats["clip_events"]
    return model


def assign_cluster(model, doc_index):
    """Dominant cluster of a document; ties go to the lowest cluster index."""
    n = model.U.shape[1]
    if not 0 <= doc_index < n:
        raise IndexError(f"document index {doc_index} out of range for {n} documents")
    return int(np.argmax(model.U[:, doc_index]))


def _check_matrix(A):
    A = check_array(A, accept_sparse=("csr", "csc", "coo"), dtype=np.float64)
    if sp.issparse(A):
        A = A.toarray()
    check_non_negative(A, "FuzzyCoClustering")
    return A


class FuzzyCoClustering(ClusterMixin, TransformerMixin, BaseEstimator):
    """
    Fuzzy co-clustering estimator.

    Parameters
    ----------
    n_clusters : int, default=2
    variant : {"fccm", "codok", "fccstf"}, default="fccstf"
    tu, tv : float, default=1.0
        Fuzzifier weights for the document and word sides.  ``tu`` is
        unused by ``fccstf``.
    max_iter : int, default=200
    tol : float, default=1e-7
        Absolute objective change that counts as convergence.
    random_state : int, default=0
        Seed for the initial document memberships.

    Attributes
    ----------
    doc_membership_ : ndarray of shape (n_clusters, n_docs)
    word_membership_ : ndarray of shape (n_clusters, n_words)
    labels_ : ndarray of shape (n_docs,)
    objective_trace_ : list of float
    n_iter_ : int
    converged_ : bool
    model_ : CoClusterModel
    """

    def __init__(
        self,
        n_clusters=2,
        variant="fccstf",
        tu=1.0,
        tv=1.0,
        max_iter=200,
        tol=1e-7,
        random_state=0,
    ):
        self.n_clusters = n_clusters
        self.variant = variant
        self.tu = tu
        self.tv = tv
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _config(self):
        return CoClusterConfig(
            n_clusters=self.n_clusters,
            variant=self.variant,
            tu=self.tu,
            tv=self.tv,
            max_iter=self.max_iter,
            tol=self.tol,
            seed=self.random_state,
        )

    def fit(self, X, y=None):
        A = _check_matrix(X)
        self.config_ = self._config()
        self.model_ = fit(A, self.config_)
        self.doc_membership_ = self.model_.U
        self.word_membership_ = self.model_.V
        self.labels_ = np.argmax(self.model_.U, axis=0)
        self.objective_trace_ = self.model_.objective_trace
        self.n_iter_ = self.model_.iterations_run
        self.converged_ = self.model_.converged
        self.n_features_in_ = A.shape[1]
        return self

    def transform(self, X):
        """Document memberships (n_docs x n_clusters) against the fitted word memberships."""
        check_is_fitted(self, "model_")
        A = _check_matrix(X)
        if A.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {A.shape[1]} words, expected {self.n_features_in_}")
        return doc_update(A, self.word_membership_, self.config_).T

    def predict(self, X):
        return np.argmax(self.transform(X), axis=1)

    def score(self, X, y=None):
        """Objective J of the fitted memberships on the training matrix ``X``."""
        check_is_fitted(self, "model_")
        return objective(self.model_, _check_matrix(X), self.config_)
