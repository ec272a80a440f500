import itertools

import numpy as np
import pytest

from pcausality import gallery
from pcausality.core import marginal, point_state, apply, Region


def _parity(word):
    return sum(word) % 2


def _strict_marginals_uniform(state):
    cells = state.region.cells
    for k in range(1, len(cells)):
        for keep in itertools.combinations(cells, k):
            m = marginal(state, [c for c in cells if c not in keep])
            assert np.allclose(m.probs, 1.0 / m.region.size, atol=1e-12, rtol=0)


@pytest.mark.parametrize("n", range(2, 9))
def test_parity_support_and_marginals(n):
    G = gallery.parity(n)
    for x in [(0,) * n, (1,) * n, tuple(np.arange(n) % 2)]:
        col = G.column(x)
        assert set(col.support()) == {w for w in itertools.product((0, 1), repeat=n) if _parity(w) == 0}
        _strict_marginals_uniform(col)
    assert np.allclose(G.matrix, G.matrix[:, :1])


@pytest.mark.parametrize("n", range(2, 9))
def test_gen_nlbox_parity_equals_ab(n):
    G = gallery.gen_nlbox(n)
    for a, b in itertools.product((0, 1), repeat=2):
        x = (a,) + (0,) * (n - 2) + (b,)
        col = G.column(x)
        assert {_parity(w) for w in col.support()} == {a * b}
        assert len(col.support()) == 2 ** (n - 1)
        _strict_marginals_uniform(col)


def test_gen_nlbox_ignores_interior_inputs():
    G = gallery.gen_nlbox(4)
    assert np.array_equal(G.column((1, 0, 1, 1)).probs, G.column((1, 1, 0, 1)).probs)


def test_nlbox_table():
    G = gallery.nlbox()
    assert G.shape == (4, 4)
    for a, b in itertools.product((0, 1), repeat=2):
        col = G.column((a, b))
        for w, p in col.support().items():
            assert (w[0] ^ w[1]) == a * b and p == 0.5


@pytest.mark.parametrize("k", [1, 2, 3, 5])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_vk_box_mixture_weights(k, n):
    G = gallery.vk_box(k, n)
    for a, b in itertools.product((0, 1), repeat=2):
        col = G.column((a,) + (0,) * (n - 2) + (b,))
        odd = sum(p for w, p in col.support().items() if _parity(w) == 1)
        if a * b == 1:
            assert odd == 0.5 ** k
            assert 1 - odd == 1 - 0.5 ** k
        else:
            assert odd == 0.0
        _strict_marginals_uniform(col)
    assert gallery.vbox(n).allclose(gallery.vk_box(1, n), 0.0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_magic_coins(n):
    G = gallery.magic_coins(n)
    col = G.column((0,) * n)
    assert col.support() == {(0,) * n: 0.5, (1,) + (0,) * (n - 2) + (1,): 0.5}
    m = marginal(col, [c for c in col.region.cells if c not in (1, n)])
    assert m.prob((0, 0)) == 0.5 and m.prob((1, 1)) == 0.5


@pytest.mark.parametrize("bad", [0, 1, -3])
def test_invalid_sizes(bad):
    with pytest.raises(ValueError):
        gallery.parity(bad)
    with pytest.raises(ValueError):
        gallery.vk_box(bad, 3) if bad < 1 else gallery.gen_nlbox(bad)


def test_build_and_catalog():
    assert set(gallery.CATALOG) == set(gallery.GalleryName)
    gm = gallery.build("vkbox", n=3, k=2)
    assert gm.map.allclose(gallery.vk_box(2, 3), 0.0)
    assert gallery.build("nlbox", n=7).n == 2
    with pytest.raises(ValueError):
        gallery.build("nope")


def test_quiescent_embed():
    S = gallery.nlbox()
    E = gallery.quiescent_embed(S, 4, offset=1)
    R = E.in_region
    # window holds no quiescent symbol: acts as S on the window
    x = (0, 2, 2, 1)
    out = apply(E, point_state(R, x))
    for w, p in out.support().items():
        assert w[0] == 0 and w[3] == 1
        assert p == 0.5 and ((w[1] - 1) ^ (w[2] - 1)) == 1
    # quiescent inside the window: identity
    y = (2, 0, 1, 1)
    assert apply(E, point_state(R, y)).support() == {y: 1.0}
    with pytest.raises(ValueError):
        gallery.quiescent_embed(S, 2, offset=1)
