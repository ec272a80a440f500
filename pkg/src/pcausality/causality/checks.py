"""Exact decision procedures for non-signalling, non-correlation and
screening-off on finite stochastic maps."""
from __future__ import annotations

import numpy as np

from ..core import RegionError, Region, StochMap, factor_product, trace_out_map
from ..validation import STOCH_TOL
from .search import SearchParams, factor_shape
from .shapes import v_shape
from .verdict import CausalityVerdict, Outcome, Property

__all__ = [
    "check_non_signalling", "check_non_correlating", "check_screening_off",
    "check_v_causal", "product_violation", "check_all", "restrict_input",
]


def _full_word(region, fixed):
    return tuple(fixed[c] for c in region.cells)


def check_non_signalling(G, i, window=None, tol=STOCH_TOL):
    """Does the output marginal at cell ``i`` depend only on ``window``?

    By linearity it is enough to compare deterministic inputs that agree on
    the window. ``window`` defaults to ``{i-1, i}`` restricted to the inputs.
    """
    if i not in G.out_region:
        raise RegionError(f"output cell {i} not in {G.out_region.cells}")
    if window is None:
        window = {i - 1, i} & set(G.in_region.cells)
    window = sorted(set(window))
    G.in_region.subregion(window)
    rest = [c for c in G.in_region.cells if c not in window]
    # marginal at i, indexed by (symbol, window word, rest word)
    marg = trace_out_map(G, [c for c in G.out_region.cells if c != i]).tensor()
    n_out = 1
    order = [0] + [n_out + G.in_region.position(c) for c in window + rest]
    win_size = G.in_region.subregion(window).size
    rest_region = G.in_region.subregion(rest)
    marg = marg.transpose(order).reshape(marg.shape[0], win_size, rest_region.size)
    diff = np.abs(marg - marg[:, :, :1]).max(axis=0)
    params = {"cell": i, "window": window, "tol": tol}
    worst = float(diff.max(initial=0.0))
    if worst <= tol:
        return CausalityVerdict(Property.NON_SIGNALLING, Outcome.PROVED, residual=worst, params=params)
    w_idx, r_idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    win_word = G.in_region.subregion(window).word(w_idx)
    base = dict(zip(window, win_word))
    first = {**base, **dict(zip(rest, rest_region.word(0)))}
    second = {**base, **dict(zip(rest, rest_region.word(r_idx)))}
    counter = {
        "inputs": [_full_word(G.in_region, first), _full_word(G.in_region, second)],
        "input_cells": list(G.in_region.cells),
        "output_cell": i,
        "marginals": [marg[:, w_idx, 0].tolist(), marg[:, w_idx, r_idx].tolist()],
        "violation": worst,
    }
    return CausalityVerdict(Property.NON_SIGNALLING, Outcome.REFUTED, counterexample=counter,
                            residual=worst, params=params)


def product_violation(S, left_in, left_out):
    """Largest violation of the conditions characterising ``S = A ⊗ B``.

    ``S`` is a product across the cut exactly when every column is a
    product distribution across the output cut, the left output marginal
    ignores the right inputs and the right output marginal ignores the left
    inputs. Returns ``(violation, description)`` for the worst condition.
    """
    li = S.in_region.subregion(set(left_in) & set(S.in_region.cells))
    ri = S.in_region.without(li.cells)
    lo = S.out_region.subregion(set(left_out) & set(S.out_region.cells))
    ro = S.out_region.without(lo.cells)
    n_out = len(S.out_region)
    axes = ([S.out_region.position(c) for c in lo.cells] + [S.out_region.position(c) for c in ro.cells]
            + [n_out + S.in_region.position(c) for c in li.cells]
            + [n_out + S.in_region.position(c) for c in ri.cells])
    T = S.tensor().transpose(axes).reshape(lo.size, ro.size, li.size, ri.size)
    left = T.sum(axis=1)   # (lo, li, ri)
    right = T.sum(axis=0)  # (ro, li, ri)
    indep = np.abs(T - left[:, None] * right[None, :]).max(axis=(0, 1))
    left_sig = np.abs(left - left[:, :, :1]).max(axis=0)
    right_sig = np.abs(right - right[:, :1, :]).max(axis=0)
    cands = [("correlated-outputs", indep), ("left-depends-on-right-input", left_sig),
             ("right-depends-on-left-input", right_sig)]
    kind, arr = max(cands, key=lambda kv: kv[1].max(initial=0.0))
    worst = float(arr.max(initial=0.0))
    a, b = np.unravel_index(int(np.argmax(arr)), arr.shape) if arr.size else (0, 0)
    word = dict(zip(li.cells, li.word(a)))
    word.update(zip(ri.cells, ri.word(b)))
    desc = {
        "kind": kind,
        "input": _full_word(S.in_region, word),
        "input_cells": list(S.in_region.cells),
        "left_in": list(li.cells), "left_out": list(lo.cells),
        "right_in": list(ri.cells), "right_out": list(ro.cells),
        "violation": worst,
    }
    if kind == "left-depends-on-right-input":
        word0 = {**word, **dict(zip(ri.cells, ri.word(0)))}
        desc["compared_with"] = _full_word(S.in_region, word0)
    elif kind == "right-depends-on-left-input":
        word0 = {**word, **dict(zip(li.cells, li.word(0)))}
        desc["compared_with"] = _full_word(S.in_region, word0)
    return worst, desc


def _product_verdict(prop, S, left_in, left_out, tol, params):
    pair = factor_product(S, left_in, left_out, tol)
    if pair is not None:
        return CausalityVerdict(prop, Outcome.PROVED, witness={"A": pair[0], "B": pair[1]},
                                params=params)
    worst, desc = product_violation(S, left_in, left_out)
    return CausalityVerdict(prop, Outcome.REFUTED, counterexample=desc, residual=worst, params=params)


def check_non_correlating(G, x, tol=STOCH_TOL):
    """Is ``Tr_x ∘ G`` a product across the cut at ``x``?

    The left factor owns input and output cells below ``x``; the right
    factor owns input cells from ``x`` on and output cells above ``x``.
    """
    if x not in G.out_region:
        raise RegionError(f"output cell {x} not in {G.out_region.cells}")
    S = trace_out_map(G, [x])
    left_in = [c for c in G.in_region.cells if c < x]
    left_out = [c for c in G.out_region.cells if c < x]
    return _product_verdict(Property.NON_CORRELATING, S, left_in, left_out, tol,
                            {"cell": x, "tol": tol})


def restrict_input(G, cell, symbol):
    """The map obtained by fixing input ``cell`` to ``symbol``."""
    pos = G.in_region.position(cell)
    T = np.take(G.tensor(), symbol, axis=len(G.out_region) + pos)
    in_r = G.in_region.without([cell])
    return StochMap(in_r, G.out_region, T.reshape(G.out_region.size, in_r.size))


def check_screening_off(G, i, tol=STOCH_TOL):
    """Does fixing input ``i`` split ``G`` into independent left/right parts?

    Output cell ``i`` may belong to either side; both are tried for each
    symbol of input ``i``.
    """
    if i not in G.in_region:
        raise RegionError(f"input cell {i} not in {G.in_region.cells}")
    left_in = [c for c in G.in_region.cells if c < i]
    witness, failures = {}, {}
    for x in range(G.in_region.dim(i)):
        S = restrict_input(G, i, x)
        tried = {}
        for side in ("left", "right"):
            left_out = [c for c in G.out_region.cells if c < i or (c == i and side == "left")]
            pair = factor_product(S, left_in, left_out, tol)
            if pair is not None:
                witness[x] = {"A": pair[0], "B": pair[1], "output_cell_side": side}
                break
            tried[side] = product_violation(S, left_in, left_out)
        else:
            failures[x] = {"symbol": x, "violation": min(v[0] for v in tried.values()),
                           "per_side": {s: d for s, (_, d) in tried.items()}}
    params = {"cell": i, "tol": tol}
    if not failures:
        return CausalityVerdict(Property.SCREENING_OFF, Outcome.PROVED, witness=witness, params=params)
    x, info = min(failures.items())
    return CausalityVerdict(Property.SCREENING_OFF, Outcome.REFUTED, counterexample=info,
                            residual=info["violation"], params=params)


def check_v_causal(G, dims=2, search=None, cells=None):
    """Search for a V factorization screened at every input cell in ``cells``."""
    search = search or SearchParams()
    cells = list(G.in_region.cells if cells is None else cells)
    per_cell = {}
    for i in cells:
        shape = v_shape(G.in_region, G.out_region, i, dims)
        v = factor_shape(G, shape, search, Property.V_CAUSAL)
        per_cell[i] = v
        if not v.proved:
            params = dict(v.params, cell=i, cells=cells)
            return CausalityVerdict(Property.V_CAUSAL, Outcome.SEARCH_EXHAUSTED, residual=v.residual,
                                    counterexample={"cell": i}, params=params, seed=search.seed)
    residual = max((v.residual for v in per_cell.values()), default=0.0)
    params = dict(next(iter(per_cell.values())).params, cells=cells) if per_cell else {"cells": cells}
    return CausalityVerdict(Property.V_CAUSAL, Outcome.PROVED,
                            witness={i: v.witness for i, v in per_cell.items()},
                            residual=residual, params=params, seed=search.seed)


_CHECKS = {
    Property.NON_SIGNALLING: (check_non_signalling, "out"),
    Property.NON_CORRELATING: (check_non_correlating, "out"),
    Property.SCREENING_OFF: (check_screening_off, "in"),
}


def check_all(G, prop, tol=STOCH_TOL):
    """Run a per-cell check at every relevant cell; refuted if any cell fails."""
    prop = Property(prop)
    fn, side = _CHECKS[prop]
    cells = G.out_region.cells if side == "out" else G.in_region.cells
    witness, worst = {}, 0.0
    for c in cells:
        v = fn(G, c, tol=tol)
        if v.refuted:
            v.params = dict(v.params, cells=list(cells))
            return v
        witness[c] = v.witness
        worst = max(worst, v.residual)
    return CausalityVerdict(prop, Outcome.PROVED, witness=witness or None, residual=worst,
                            params={"cells": list(cells), "tol": tol})
