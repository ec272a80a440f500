import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from pcausality import gallery
from pcausality.causality import (
    Outcome, SearchParams, ShapeError, ShapeFactorizer, check_v_causal, compose_shape,
    factor_shape, pca_shape, project_columns_simplex, random_boxes, v_shape,
)
from pcausality.core import Region, StochMap

R3 = Region.uniform([0, 1, 2])


@settings(max_examples=100)
@given(st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_projection_kkt(rows, cols, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(scale=2.0, size=(rows, cols))
    P = project_columns_simplex(X)
    assert np.allclose(P.sum(axis=0), 1.0, atol=1e-12)
    assert P.min() >= 0
    # optimality: (x - p) . (e_k - p) <= 0 for every vertex e_k
    for j in range(cols):
        g = X[:, j] - P[:, j]
        for k in range(rows):
            e = np.zeros(rows); e[k] = 1
            assert g @ (e - P[:, j]) <= 1e-10


def test_projection_fixes_simplex_points_and_batches(rng):
    Q = rng.dirichlet(np.ones(4), size=3).T
    assert np.allclose(project_columns_simplex(Q), Q, atol=1e-14)
    X = rng.normal(size=(5, 4, 3))
    batched = project_columns_simplex(X)
    for b in range(5):
        assert np.allclose(batched[b], project_columns_simplex(X[b]))


def _planted(shape, seed):
    return StochMap(shape.in_region, shape.out_region,
                    compose_shape(shape, random_boxes(shape, np.random.default_rng(1000 + seed))))


@pytest.mark.parametrize("seed", range(3))
def test_planted_v_recovered(seed):
    shape = v_shape(R3, R3, 1, 2)
    G = _planted(shape, seed)
    v = factor_shape(G, shape, SearchParams(seed=seed))
    assert v.proved and v.residual <= 1e-8
    rebuilt = compose_shape(shape, {k: m.matrix for k, m in v.witness.items()})
    assert np.sum((rebuilt - G.matrix) ** 2) <= 1e-8


def test_histories_monotone_and_deterministic():
    shape = pca_shape(R3)
    G = _planted(shape, 7)
    a = ShapeFactorizer(shape, restarts=8, seed=3, stop_on_accept=False, max_sweeps=60).fit(G)
    b = ShapeFactorizer(shape, restarts=8, seed=3, stop_on_accept=False, max_sweeps=60).fit(G)
    assert a.n_restarts_run_ == 8
    for h in a.histories_:
        assert all(y <= x for x, y in zip(h, h[1:]))
    assert a.histories_ == b.histories_
    assert a.residual_ == min(h[-1] for h in a.histories_)
    assert a.best_restart_ == min(k for k, h in enumerate(a.histories_) if h[-1] == a.residual_)


def test_restart_streams_do_not_depend_on_batching():
    shape = v_shape(R3, R3, 1, 2)
    G = _planted(shape, 2)
    kw = dict(restarts=6, seed=5, stop_on_accept=False, max_sweeps=30)
    a = ShapeFactorizer(shape, batch_size=6, **kw).fit(G)
    b = ShapeFactorizer(shape, batch_size=2, **kw).fit(G)
    for ha, hb in zip(a.histories_, b.histories_):
        assert np.allclose(ha, hb, rtol=1e-9, atol=1e-14)


def test_estimator_api():
    shape = v_shape(R3, R3, 1, 2)
    est = ShapeFactorizer(shape, restarts=4)
    params = est.get_params()
    assert params["restarts"] == 4 and params["shape"] is shape
    assert clone(est).get_params()["restarts"] == 4
    est.set_params(restarts=2)
    G = _planted(shape, 0)
    est.fit(G)
    assert est.score(G) == pytest.approx(-est.residual_, abs=1e-12)
    assert est.reconstruct().shape == (8, 8)


def test_shape_mismatch():
    shape = v_shape(R3, R3, 1, 2)
    with pytest.raises(ShapeError):
        ShapeFactorizer(shape).fit(gallery.parity(3))
    with pytest.raises(ShapeError):
        ShapeFactorizer(shape).fit(np.eye(4))


def test_search_never_refutes():
    G = gallery.gen_nlbox(3)
    shape = v_shape(G.in_region, G.out_region, 2, 2)
    v = factor_shape(G, shape, SearchParams(restarts=4, max_sweeps=50))
    assert v.holds is Outcome.SEARCH_EXHAUSTED
    assert v.residual > 1e-3
    assert v.witness is None and v.params["restarts_run"] == 4


def test_gen_nlbox2_is_v_realizable():
    # with two cells the screen's right wire can carry the input to the
    # right party, so the PR box factorizes through the V at cell 1
    G = gallery.nlbox()
    v = check_v_causal(G, dims=4, search=SearchParams(seed=0), cells=[1])
    assert v.proved and v.residual <= 1e-8
