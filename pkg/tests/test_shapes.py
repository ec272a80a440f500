import numpy as np
import pytest

from pcausality.causality import (
    Box, CircuitShape, ShapeError, compose_shape, environment, pca_shape, random_boxes,
    v_shape, vv_shape, boxes_as_maps,
)
from pcausality.core import Region


R3 = Region.uniform([0, 1, 2])
R4 = Region.uniform([0, 1, 2, 3])


def test_v_shape_wiring():
    shape = v_shape(R4, R4, 1, [2, 3, 4, 5])
    assert shape.box("A").inputs == ("x0",) and shape.box("A").outputs == ("y0", "l'")
    assert shape.box("B").inputs == ("x2", "x3") and shape.box("B").outputs == ("r'", "y3")
    assert shape.box("L").outputs == ("y1",) and shape.box("R").outputs == ("y2",)
    assert shape.hidden_wires() == {"l'": 2, "l": 3, "r": 4, "r'": 5}
    assert shape.box_shape(shape.box("C")) == (12, 2)


def test_shape_validation():
    with pytest.raises(ShapeError):
        v_shape(R3, R3, 7)
    with pytest.raises(ShapeError):
        vv_shape(R3, R3, 2)
    with pytest.raises(ShapeError):
        v_shape(R3, R3, 1, [2, 2])
    R1 = Region.uniform([0])
    with pytest.raises(ShapeError):  # output never produced
        CircuitShape((Box("A", ("x0",), ()),), {}, R1, R1, (("A",),))
    with pytest.raises(ShapeError):  # backwards wire
        CircuitShape((Box("A", ("x0", "h"), ("y0",)), Box("B", (), ("h",))), {"h": 2}, R1, R1,
                     (("A",), ("B",)))
    with pytest.raises(ShapeError):
        CircuitShape((Box("A", ("x0",), ("y0",)),), {}, R1, R1, ())


def test_shape_does_not_mutate_wires():
    wires = {"h": 2}
    CircuitShape((Box("A", ("x0",), ("h",)), Box("B", ("h",), ("y0",))), wires,
                 Region.uniform([0]), Region.uniform([0]), (("A",), ("B",)))
    assert wires == {"h": 2}


def test_compose_shape_identity_wiring():
    # C copies the cell to both wires, L keeps l, R keeps r: identity on 2 cells
    R2 = Region.uniform([0, 1])
    shape = v_shape(R2, R2, 0, 2)
    copy = np.zeros((4, 2)); copy[0, 0] = copy[3, 1] = 1
    keep_second = np.zeros((2, 4))
    for a in range(2):
        for b in range(2):
            keep_second[b, 2 * a + b] = 1
    keep_first = np.zeros((2, 4))
    for a in range(2):
        for b in range(2):
            keep_first[a, 2 * a + b] = 1
    boxes = {"A": np.array([[0.5], [0.5]]), "C": copy, "B": np.array([[1.0, 0.0], [0.0, 1.0]]),
             "L": keep_second, "R": keep_first}
    # y0 = l = x0 ; y1 = r = x0 (R reads (r, r'), keeps r)
    G = compose_shape(shape, boxes)
    expected = np.zeros((4, 4))
    for x0 in range(2):
        for x1 in range(2):
            expected[2 * x0 + x0, 2 * x0 + x1] = 1
    assert np.array_equal(G, expected)


@pytest.mark.parametrize("make", [lambda: v_shape(R4, R4, 1, [2, 3, 2, 3]),
                                  lambda: vv_shape(R4, R4, 1, 2), lambda: pca_shape(R3, 2, 3)])
def test_environment_is_linear_in_the_box(make, rng):
    shape = make()
    boxes = random_boxes(shape, rng)
    G = compose_shape(shape, boxes).reshape(-1)
    for b in shape.boxes:
        J = environment(shape, boxes, b.name)
        assert np.allclose(J @ boxes[b.name].reshape(-1), G, atol=1e-12, rtol=0)


def test_composed_map_is_stochastic(rng):
    shape = vv_shape(R4, R4, 1, 3)
    G = compose_shape(shape, random_boxes(shape, rng))
    assert np.allclose(G.sum(axis=0), 1.0, atol=1e-12)
    maps = boxes_as_maps(shape, random_boxes(shape, rng))
    assert set(maps) == {"A", "B", "C1", "C2", "L", "M", "R"}


def test_vv_witness_rewires_into_v_witness(rng):
    """A VV factorization at (1, 2) yields a V factorization at 1.

    The V box B' runs C2 and B and then the VV box R; the VV middle box M
    plays the V box R.
    """
    vv = vv_shape(R4, R4, 1, 2)
    for _ in range(20):
        boxes = random_boxes(vv, rng)
        G = compose_shape(vv, boxes)
        v = v_shape(R4, R4, 1, 2)
        C2 = boxes["C2"].reshape(2, 2, 2)        # l2 r2 x2
        B = boxes["B"].reshape(2, 2)             # r' x3
        Rvv = boxes["R"].reshape(2, 2, 2)        # y3 r2 r'
        Bp = np.einsum("abx,cz,ybc->ayxz", C2, B, Rvv).reshape(4, 4)
        witness = {"A": boxes["A"], "C": boxes["C1"], "B": Bp, "L": boxes["L"], "R": boxes["M"]}
        assert np.max(np.abs(compose_shape(v, witness) - G)) <= 1e-12
