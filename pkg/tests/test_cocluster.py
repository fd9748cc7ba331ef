import io
import itertools
import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.base import clone
from sklearn.feature_extraction.text import CountVectorizer, TfidfTransformer
from sklearn.pipeline import make_pipeline

from fuzzyqa.cocluster import (
    VARIANTS,
    CoClusterConfig,
    CoClusterModel,
    FuzzyCoClustering,
    assign_cluster,
    build_matrix,
    doc_update,
    dump_matrix,
    fit,
    load_matrix,
    objective,
    project_simplex,
)
from fuzzyqa.exceptions import FuzzyQAError, ParseError

BLOCK = np.array(
    [
        [5.0, 4.0, 0.5, 0.2],
        [4.0, 5.0, 0.2, 0.5],
        [0.5, 0.2, 5.0, 4.0],
        [0.2, 0.5, 4.0, 5.0],
    ]
)
WITNESS = np.array([[10.0, 0.1], [0.1, 0.1]])


def planted_partition_oracle(A):
    """Exhaustively pick the 2-way doc/word split with the most in-block weight."""
    n, m = A.shape
    best, best_val = None, -np.inf
    for docs in itertools.product([0, 1], repeat=n):
        for words in itertools.product([0, 1], repeat=m):
            if len(set(docs)) < 2 or len(set(words)) < 2:
                continue
            val = sum(A[i, j] for i in range(n) for j in range(m) if docs[i] == words[j])
            if val > best_val:
                best, best_val = docs, val
    return best


# --- matrix building ---------------------------------------------------------


def test_build_matrix_single_doc():
    tdm = build_matrix([(0, ["w"])])
    assert tdm.weights[0, 0] == pytest.approx(math.log(2))
    assert tdm.vocabulary == ("w",)


def test_build_matrix_tfidf_by_hand():
    tdm = build_matrix([(0, ["a", "a", "b"]), (1, ["b"]), (2, ["c"])])
    assert tdm.vocabulary == ("a", "b", "c")
    expected = np.array(
        [
            [2 * math.log(1 + 3 / 1), math.log(1 + 3 / 2), 0],
            [0, math.log(1 + 3 / 2), 0],
            [0, 0, math.log(1 + 3 / 1)],
        ]
    )
    np.testing.assert_allclose(tdm.weights, expected, rtol=1e-15)


def test_build_matrix_identical_docs_and_pruning():
    tdm = build_matrix([(0, ["x", "y"]), (1, ["x", "y"]), (2, [])], vocabulary=["x", "y", "z"])
    np.testing.assert_array_equal(tdm.weights[0], tdm.weights[1])
    assert tdm.doc_ids == (0, 1)
    assert tdm.pruned_docs == (2,)
    assert tdm.pruned_words == ("z",)
    with pytest.raises(FuzzyQAError):
        build_matrix([])


def test_matrix_file_roundtrip():
    A = np.array([[0.1, 1 / 3], [2.0, 0.0]])
    buf = io.StringIO()
    dump_matrix(A, buf)
    assert buf.getvalue().splitlines()[0] == "2 2"
    buf.seek(0)
    np.testing.assert_array_equal(load_matrix(buf), A)


@pytest.mark.parametrize(
    "text,line",
    [("", 1), ("2 2\n1 2\n", 3), ("1 2\n1 x\n", 2), ("1 2\n1 2 3\n", 2), ("1 1\n-1\n", 2), ("a b\n", 1)],
)
def test_matrix_file_errors(text, line):
    with pytest.raises(ParseError) as err:
        load_matrix(io.StringIO(text))
    assert err.value.lineno == line


# --- fitting -----------------------------------------------------------------


@pytest.mark.parametrize("variant", VARIANTS)
def test_single_cluster(variant):
    model = fit(BLOCK, CoClusterConfig(1, variant))
    np.testing.assert_array_equal(model.U, np.ones((1, 4)))
    np.testing.assert_allclose(model.V.sum(axis=1), 1.0, atol=1e-12)
    assert len(model.objective_trace) >= 1


@pytest.mark.parametrize("variant", VARIANTS)
def test_block_recovery(variant):
    planted = planted_partition_oracle(BLOCK)
    assert planted in [(0, 0, 1, 1), (1, 1, 0, 0)]
    model = fit(BLOCK, CoClusterConfig(2, variant, seed=3))
    labels = [assign_cluster(model, i) for i in range(4)]
    assert labels[0] == labels[1] != labels[2] == labels[3]
    for i in range(4):
        assert model.U[labels[i], i] > 0.9


@pytest.mark.parametrize("variant", VARIANTS)
def test_duplicate_documents_share_memberships(variant):
    A = np.vstack([BLOCK, BLOCK[1]])
    model = fit(A, CoClusterConfig(2, variant, seed=5))
    np.testing.assert_allclose(model.U[:, 1], model.U[:, 4], atol=1e-9)


def test_too_many_clusters():
    with pytest.raises(FuzzyQAError):
        fit(BLOCK, CoClusterConfig(5))


def test_config_validation():
    with pytest.raises(ValueError):
        CoClusterConfig(variant="kmeans")
    with pytest.raises(ValueError):
        CoClusterConfig(tu=0)
    with pytest.raises(ValueError):
        CoClusterConfig(n_clusters=0)
    assert CoClusterConfig(variant="FCC_STF").variant == "fccstf"


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, (6, 5), elements=st.floats(0, 10)),
    st.sampled_from(VARIANTS),
    st.integers(1, 3),
    st.integers(0, 2**63 - 1),
)
def test_membership_invariants(A, variant, C, seed):
    config = CoClusterConfig(C, variant, seed=seed)
    model = fit(A, config)
    assert np.all(np.abs(model.U.sum(axis=0) - 1) < 1e-9)
    assert np.all(np.abs(model.V.sum(axis=1) - 1) < 1e-9)
    assert np.all((model.U >= 0) & (model.U <= 1))
    assert np.all((model.V >= 0) & (model.V <= 1))
    trace = np.array(model.objective_trace)
    assert trace[-1] >= trace[0] - config.tol
    if variant != "codok":
        # exact coordinate ascent
        assert np.all(np.diff(trace) >= -1e-9 * max(1.0, abs(trace).max()))
    again = fit(A, config)
    assert np.array_equal(again.U, model.U) and np.array_equal(again.V, model.V)


@pytest.mark.parametrize("variant", VARIANTS)
def test_objective_self_consistency_and_permutation(variant):
    config = CoClusterConfig(3, variant, seed=11)
    A = np.random.default_rng(0).random((7, 6))
    model = fit(A, config)
    assert objective(model, A, config) == pytest.approx(model.objective_trace[-1], abs=1e-9)
    perm = [2, 0, 1]
    permuted = CoClusterModel(model.U[perm], model.V[perm])
    assert objective(permuted, A, config) == pytest.approx(objective(model, A, config), abs=1e-12)
    for i in range(7):
        assert perm[assign_cluster(permuted, i)] == assign_cluster(model, i)


def test_objective_zero_matrix_is_fuzzifier_only():
    C, n, m = 2, 3, 4
    model = CoClusterModel(np.full((C, n), 1 / C), np.full((C, m), 1 / m))
    A = np.zeros((n, m))
    fccm = CoClusterConfig(C, "fccm", tu=1.5, tv=0.5)
    assert objective(model, A, fccm) == pytest.approx(1.5 * n * math.log(C) + 0.5 * C * math.log(m))
    codok = CoClusterConfig(C, "codok", tu=1.5, tv=0.5)
    assert objective(model, A, codok) == pytest.approx(-1.5 * n / C - 0.5 * C / m)
    stf = CoClusterConfig(C, "fccstf", tu=1.5, tv=0.5)
    assert objective(model, A, stf) == pytest.approx(-0.5 * C / m)
    with pytest.raises(ValueError):
        objective(model, np.zeros((n + 1, m)), fccm)


def test_assign_cluster_ties_and_range():
    model = CoClusterModel(np.array([[0.7, 0.5], [0.3, 0.5]]), np.full((2, 1), 1.0))
    assert assign_cluster(model, 0) == 0
    assert assign_cluster(model, 1) == 0
    with pytest.raises(IndexError):
        assign_cluster(model, 2)


# --- Table 2 behaviours --------------------------------------------------------


def test_naive_entropy_update_overflows_but_shipped_does_not():
    A = np.array([[800.0, 0.0], [0.0, 800.0]])
    V = np.array([[1.0, 0.0], [0.0, 1.0]])
    config = CoClusterConfig(2, "fccm", tu=1.0)
    S = V @ A.T
    assert (S / config.tu).max() > 710
    with np.errstate(over="ignore", invalid="ignore"):
        E = np.exp(S / config.tu)
        naive = E / E.sum(axis=0, keepdims=True)
    assert not np.all(np.isfinite(naive))
    U = doc_update(A, V, config)
    assert np.all(np.isfinite(U))
    np.testing.assert_allclose(U, np.eye(2), atol=1e-300)


def test_codok_negative_word_update_is_clipped(caplog):
    U0 = np.array([[0.6, 0.3], [0.4, 0.7]])
    tv = 0.1
    T = U0 @ WITNESS
    raw = 1 / 2 + (T - T.mean(axis=1, keepdims=True)) / (2 * tv)
    assert raw.min() < 0
    with caplog.at_level(logging.INFO, logger="fuzzyqa.cocluster"):
        model = fit(WITNESS, CoClusterConfig(2, "codok", tv=tv, seed=0))
    assert model.clip_events >= 1
    assert any("negative raw word-membership" in r.message for r in caplog.records)
    np.testing.assert_allclose(model.V.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(model.U.sum(axis=0), 1.0, atol=1e-12)
    assert model.V.min() >= 0


def test_fccstf_clips_on_witness(caplog):
    with caplog.at_level(logging.INFO, logger="fuzzyqa.cocluster"):
        model = fit(WITNESS, CoClusterConfig(2, "fccstf", tv=0.1, seed=0))
    assert model.clip_events >= 1
    assert any("renormalized" in r.message for r in caplog.records)
    assert model.V.min() >= 0


def _bisection_projection(x):
    lo, hi = x.min() - 1.0, x.max()
    for _ in range(200):
        mid = (lo + hi) / 2
        if np.maximum(x - mid, 0).sum() > 1:
            lo = mid
        else:
            hi = mid
    return np.maximum(x - (lo + hi) / 2, 0)


@given(arrays(np.float64, (3, 5), elements=st.floats(-20, 20)))
def test_simplex_projection_matches_bisection(X):
    P = project_simplex(X, axis=1)
    for row, prow in zip(X, P):
        np.testing.assert_allclose(prow, _bisection_projection(row), atol=1e-9)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)


# --- estimator API -------------------------------------------------------------


def test_estimator_api():
    est = FuzzyCoClustering(n_clusters=2, variant="fccm", random_state=3)
    assert est.get_params()["variant"] == "fccm"
    fitted = est.fit(BLOCK)
    assert fitted is est
    assert est.doc_membership_.shape == (2, 4)
    np.testing.assert_array_equal(est.labels_, est.predict(BLOCK))
    np.testing.assert_allclose(est.transform(BLOCK).sum(axis=1), 1.0)
    assert est.score(BLOCK) == pytest.approx(est.objective_trace_[-1])
    twin = clone(est).set_params(variant="codok")
    assert twin.get_params()["variant"] == "codok"
    with pytest.raises(ValueError):
        est.transform(np.ones((2, 3)))
    with pytest.raises(ValueError):
        FuzzyCoClustering().fit(-BLOCK)


def test_estimator_in_pipeline():
    docs = ["red rose garden", "rose garden red", "tea sugar sweet", "sweet tea cup"]
    pipe = make_pipeline(CountVectorizer(), TfidfTransformer(), FuzzyCoClustering(random_state=1))
    labels = pipe.fit_predict(docs)
    assert labels[0] == labels[1] != labels[2] == labels[3]
