import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynspect import sbm
from dynspect.evaluation import equal_row_pairs, equal_time_triples, stability_report
from dynspect.graph import DynamicGraph
from dynspect.operators import Variant, unfold
from dynspect.spectral import (DegenerateWindowWarning, Method, NumericError, Selection, align,
                               default_dimension, embed, noise_free_embed, svd_check, svd_unfolded,
                               ulse_n1_closed_form)

SQRT3 = np.sqrt(3.0)


def _merged_rows(labels, t):
    """Node indices of the two communities merged at snapshot t (0-based)."""
    a, b = {1: (0, 1), 2: (1, 2)}[t]
    return np.flatnonzero(labels == a), np.flatnonzero(labels == b)


# ----------------------------------------------------------------------------- SVD

def test_identity_top2():
    res = svd_unfolded(np.eye(2), Selection.top(2))
    np.testing.assert_allclose(res.singular_values, [1, 1])
    np.testing.assert_allclose(res.U.T @ res.U, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(res.U, res.V, atol=1e-14)


def test_identity_window_inside_repeated_value_warns():
    with pytest.warns(DegenerateWindowWarning):
        res = svd_unfolded(np.eye(4), Selection.top(2))
    assert res.warnings


def test_diagonal_bottom_window():
    res = svd_unfolded(np.diag([3.0, 2.0, 1.0]), Selection.bottom(1, 1))
    np.testing.assert_allclose(res.singular_values, [2.0])
    np.testing.assert_allclose(res.U[:, 0], [0, 1, 0], atol=1e-14)
    np.testing.assert_allclose(res.V[:, 0], [0, 1, 0], atol=1e-14)


def test_orders_follow_selection():
    L = np.diag([5.0, 4.0, 3.0, 2.0, 1.0])
    np.testing.assert_allclose(svd_unfolded(L, Selection.top(3)).singular_values, [5, 4, 3])
    np.testing.assert_allclose(svd_unfolded(L, Selection.bottom(1, 3)).singular_values, [2, 3, 4])


def test_zero_singular_value_in_window_is_an_error():
    with pytest.raises(NumericError):
        svd_unfolded(np.zeros((3, 6)), Selection.top(1))
    with pytest.raises(ValueError):
        svd_unfolded(np.eye(3), Selection.bottom(1, 3))


def test_sign_convention():
    rng = np.random.default_rng(0)
    L = rng.normal(size=(8, 16))
    res = svd_unfolded(L, Selection.top(4))
    for j in range(4):
        col = res.U[:, j]
        assert col[np.argmax(np.abs(col))] > 0
    again = svd_unfolded(L, Selection.top(4))
    assert np.array_equal(res.U, again.U)


def test_matches_lapack_singular_values():
    rng = np.random.default_rng(1)
    L = rng.normal(size=(10, 30))
    ref = np.linalg.svd(L, compute_uv=False)
    np.testing.assert_allclose(svd_unfolded(L, Selection.top(4)).singular_values, ref[:4], rtol=1e-12)
    np.testing.assert_allclose(svd_unfolded(L, Selection.bottom(1, 3)).singular_values,
                               np.sort(ref)[1:4], rtol=1e-10)


def test_noise_free_n1_structure(synthetic1_probs):
    labels, P = synthetic1_probs
    n = len(labels)
    op = unfold(P, Variant.ULSE_N1, tau=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWindowWarning)
        full = svd_unfolded(op, Selection.bottom(0, n))
    assert np.sum(np.abs(full.singular_values - SQRT3) <= 1e-8) == n - 3
    bottom = svd_unfolded(op, Selection.bottom(0, 3))
    assert np.all(bottom.singular_values < SQRT3 - 1e-3)
    for k in range(3):
        rows = bottom.U[labels == k]
        assert np.ptp(rows, axis=0).max() <= 1e-8


# ----------------------------------------------------------------------------- embeddings

def test_uase_k2(k2):
    # A has eigenvalues +1 and -1, so the top singular value is repeated and the
    # one-dimensional window is not unique; only sigma_1 is well defined
    with pytest.warns(DegenerateWindowWarning):
        emb = embed(DynamicGraph.from_arrays([k2]), "uase", 1)
    np.testing.assert_allclose(emb.singular_values, [1.0])
    assert emb.svd.warnings


def test_uase_rank_one_rows_equal():
    # P = J has a single nonzero singular value, so the window is unique
    emb = noise_free_embed([np.full((2, 2), 1.0)], "uase", 1)
    np.testing.assert_allclose(emb.singular_values, [2.0])
    np.testing.assert_allclose(emb.anchor[0], emb.anchor[1], atol=1e-15)


def test_embedding_shapes_and_formulas():
    s = sbm.sample(sbm.synthetic_preset("synthetic1", n=50, seed=2))
    for method, d in (("uase", 3), ("ulse-n1", 2), ("ulse-n2", 3)):
        emb = embed(s.graph, method, d)
        assert emb.anchor.shape == (50, d) and emb.T == 3
        assert all(Y.shape == (50, d) for Y in emb.dynamic)
        res = emb.svd
        root = np.sqrt(res.singular_values)
        np.testing.assert_allclose(emb.anchor, res.U * root)
        for t, Y in enumerate(emb.dynamic):
            expected = res.V[t * 50:(t + 1) * 50] * root
            if method == "ulse-n1":
                expected = expected - res.U / root
            np.testing.assert_allclose(Y, expected)


def test_dimension_rules():
    assert default_dimension("ulse-n1", 3) == 2
    assert default_dimension("ulse-n2", 3) == 3
    assert default_dimension("uase", 3) == 3
    g = DynamicGraph.from_arrays([np.ones((3, 3)) - np.eye(3)])
    with pytest.raises(ValueError):
        embed(g, "ulse-n1", 3)
    with pytest.raises(ValueError):
        embed(g, "uase", 0)


@pytest.mark.parametrize("method,d", [("ulse-n1", 2), ("ulse-n2", 3), ("uase", 3)])
def test_noise_free_cross_sectional_exactness(synthetic1_probs, method, d):
    labels, P = synthetic1_probs
    emb = noise_free_embed(P, method, d)
    for t in (1, 2):
        a, b = _merged_rows(labels, t)
        Y = emb.dynamic[t]
        gap = np.abs(Y[a][:, None, :] - Y[b][None, :, :]).max()
        assert gap <= 1e-8 * np.linalg.norm(Y)


def test_subtracting_anchor_scaled_by_root_breaks_stability(synthetic1_probs):
    # V_t S^{1/2} - U S^{1/2} leaves a community-dependent offset behind
    labels, P = synthetic1_probs
    emb = noise_free_embed(P, "ulse-n1", 2)
    res = emb.svd
    Y = res.V[200:400] * np.sqrt(res.singular_values) - res.U * np.sqrt(res.singular_values)
    a, b = _merged_rows(labels, 1)
    assert np.abs(Y[a[0]] - Y[b[0]]).max() > 1e-3


def test_noise_free_identical_rows_toy():
    P = np.array([[0.5, 0.5, 0.2], [0.5, 0.5, 0.2], [0.2, 0.2, 0.6]])
    for method, d in (("ulse-n1", 1), ("ulse-n2", 2), ("uase", 2)):
        Y = noise_free_embed([P, P], method, d).dynamic
        for t in range(2):
            np.testing.assert_allclose(Y[t][0], Y[t][1], atol=1e-12)
        np.testing.assert_allclose(Y[0], Y[1], atol=1e-12)


def test_noise_free_longitudinal(synthetic1_probs):
    labels, P = synthetic1_probs
    triples_any = equal_time_triples(P)
    triples_deg = equal_time_triples(P, require_equal_degrees=True)
    assert len(triples_any) > 0 and len(triples_deg) == 0
    n2 = noise_free_embed(P, "ulse-n2", 3)
    assert stability_report(n2, longitudinal=triples_any).longitudinal_rel_max <= 1e-8
    # same rows with degree vectors equal across time: ULSE-n1 longitudinal exactness
    Q = [P[0], P[0].copy()]
    n1 = noise_free_embed(Q, "ulse-n1", 2)
    rep = stability_report(n1, longitudinal=equal_time_triples(Q, require_equal_degrees=True))
    assert rep.n_longitudinal_triples == len(labels)
    assert rep.longitudinal_rel_max <= 1e-8


def test_closed_form_matches_pipeline(synthetic1_probs):
    _, P = synthetic1_probs
    emb = noise_free_embed(P, "ulse-n1", 2)
    closed = ulse_n1_closed_form(P, 2)
    W, resid = align(np.vstack(closed), emb.stacked())
    rows = np.linalg.norm(np.vstack(closed) @ W - emb.stacked(), axis=1)
    assert rows.max() <= 1e-8


def test_noise_free_anchor_constant_on_communities(synthetic1_probs):
    labels, P = synthetic1_probs
    X = noise_free_embed(P, "ulse-n1", 2).anchor
    for k in range(3):
        assert np.ptp(X[labels == k], axis=0).max() <= 1e-8


def test_noise_free_rejects_bad_input():
    with pytest.raises(ValueError):
        noise_free_embed([np.array([[0.1, 0.2], [0.3, 0.1]])], "uase", 1)
    with pytest.raises(ValueError):
        noise_free_embed([np.array([[1.5, 0.2], [0.2, 0.1]])], "uase", 1)


@st.composite
def small_sbm(draw):
    n = draw(st.integers(20, 60))
    seed = draw(st.integers(0, 2**32 - 1))
    name = draw(st.sampled_from(["synthetic1", "synthetic2"]))
    return sbm.sample(sbm.synthetic_preset(name, n=n, seed=seed)).graph


@settings(max_examples=25, deadline=None)
@given(small_sbm(), st.sampled_from([("uase", 3), ("ulse-n1", 2), ("ulse-n2", 3)]))
def test_svd_invariants_on_every_embed(graph, md):
    method, d = md
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWindowWarning)
        emb = embed(graph, method, d)
    ortho, resid = svd_check(unfold(graph, Variant(method), 0.1).matrix, emb.svd)
    assert ortho <= 1e-10 and resid <= 1e-8
    s = emb.singular_values
    assert np.all(np.diff(s) >= 0) if method == "ulse-n1" else np.all(np.diff(s) <= 0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([("uase", 3), ("ulse-n1", 2), ("ulse-n2", 3)]))
def test_permutation_consistency(seed, md):
    method, d = md
    g = sbm.sample(sbm.synthetic_preset("synthetic1", n=40, seed=seed)).graph
    perm = np.random.default_rng(seed).permutation(40)
    gp = DynamicGraph(tuple(A[np.ix_(perm, perm)] for A in g.snapshots))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWindowWarning)
        a, b = embed(g, method, d), embed(gp, method, d)
    for Ya, Yb in zip(a.dynamic, b.dynamic):
        Da = np.linalg.norm(Ya[:, None] - Ya[None], axis=2)
        Db = np.linalg.norm(Yb[:, None] - Yb[None], axis=2)
        np.testing.assert_allclose(Da[np.ix_(perm, perm)], Db, atol=1e-8)


# ----------------------------------------------------------------------------- alignment

def test_align_self():
    X = np.random.default_rng(3).normal(size=(30, 4))
    W, r = align(X, X)
    np.testing.assert_allclose(W, np.eye(4), atol=1e-10)
    assert r <= 1e-10


def test_align_random_rotation():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(30, 3))
    R, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    W, r = align(X, X @ R)
    assert r <= 1e-8
    np.testing.assert_allclose(W, R, atol=1e-8)


def test_align_sign_flip():
    X = np.random.default_rng(5).normal(size=(10, 1))
    W, r = align(X, -X)
    np.testing.assert_allclose(W, [[-1.0]])
    assert r <= 1e-10


def test_align_shape_mismatch():
    with pytest.raises(ValueError):
        align(np.ones((3, 2)), np.ones((3, 3)))


def test_method_enum_round_trip():
    assert Method("ulse-n1") is Method.ULSE_N1
    with pytest.raises(ValueError):
        Method("omni")
