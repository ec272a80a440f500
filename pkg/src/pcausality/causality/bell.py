"""CHSH evaluation for two-party binary boxes."""
import itertools

import numpy as np

from ..core import Region, StochMap, deterministic_map, tensor_map

__all__ = ["chsh", "correlator", "classical_chsh_bound", "local_box", "bipartite_parity_box"]


def _check_box(box):
    if len(box.in_region) != 2 or len(box.out_region) != 2:
        raise ValueError("CHSH needs a box with two input and two output cells")
    if any(d != 2 for d in box.in_region.dims + box.out_region.dims):
        raise ValueError("CHSH needs binary inputs and outputs")


def correlator(box, a, b):
    """``P(x1 = x2 | ab) - P(x1 != x2 | ab)``; party 1 is the lower cell label."""
    _check_box(box)
    col = box.matrix[:, 2 * a + b].reshape(2, 2)
    return float(col[0, 0] + col[1, 1] - col[0, 1] - col[1, 0])


def chsh(box):
    """``E(0,0) + E(0,1) + E(1,0) - E(1,1)``."""
    return correlator(box, 0, 0) + correlator(box, 0, 1) + correlator(box, 1, 0) - correlator(box, 1, 1)


def local_box(p1, p2):
    """Product box from single-party response matrices ``P1(x1|a)``, ``P2(x2|b)``."""
    A = StochMap(Region((0,), (2,)), Region((0,), (2,)), p1)
    B = StochMap(Region((1,), (2,)), Region((1,), (2,)), p2)
    return tensor_map(A, B)


def classical_chsh_bound():
    """Best CHSH value over the 16 deterministic strategy pairs ``x1=f(a), x2=g(b)``."""
    cell0, cell1 = Region((0,), (2,)), Region((1,), (2,))
    functions = list(itertools.product((0, 1), repeat=2))
    best = -np.inf
    for f, g in itertools.product(functions, functions):
        A = deterministic_map(cell0, cell0, lambda u, f=f: (f[u[0]],))
        B = deterministic_map(cell1, cell1, lambda u, g=g: (g[u[0]],))
        best = max(best, chsh(tensor_map(A, B)))
    return float(best)


def bipartite_parity_box(G, left_out, a_cell, b_cell, fixed=None):
    """Coarse-grain ``G`` into a two-party box.

    Inputs are the bits at ``a_cell`` and ``b_cell`` (other inputs held at
    ``fixed``, default all zeros); outputs are the parities of the output
    cells in ``left_out`` and of the remaining output cells.
    """
    fixed = dict(fixed or {})
    left_out = set(left_out)
    out_cells = G.out_region.cells
    lmask = np.array([c in left_out for c in out_cells])
    words = np.array(list(G.out_region.words()), dtype=int).reshape(-1, len(out_cells))
    lpar = words[:, lmask].sum(axis=1) % 2
    rpar = words[:, ~lmask].sum(axis=1) % 2
    mat = np.zeros((4, 4))
    for a, b in itertools.product((0, 1), repeat=2):
        word = {c: fixed.get(c, 0) for c in G.in_region.cells}
        word[a_cell], word[b_cell] = a, b
        col = G.matrix[:, G.in_region.word_index(word)]
        np.add.at(mat[:, 2 * a + b], 2 * lpar + rpar, col)
    box_region = Region((0, 1), (2, 2))
    return StochMap(box_region, box_region, mat)
