"""Exact finite-dimensional stochastic algebra over 1D cell arrays.

Words over a region are indexed lexicographically with the smallest cell
label as the most significant digit (mixed radix when cells have different
dimensions). This is NumPy's C order once the region's axes are laid out in
increasing label order, so every map is stored as a dense matrix whose
tensor view has axes ``out cells..., in cells...``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .validation import (
    EXACT_TOL,
    STOCH_TOL,
    check_distribution,
    check_positive_int,
    check_probability,
    check_stochastic,
)

__all__ = [
    "Alphabet", "Region", "State", "StochMap", "FiniteConfig", "RegionError",
    "point_state", "mix", "apply", "compose", "tensor_map", "tensor_state",
    "marginal", "trace_out_map", "extend", "identity_map", "constant_map",
    "deterministic_map", "factor_product", "config_distance",
]


class RegionError(ValueError):
    """Regions overlap, mismatch or are not sub-regions where required."""


@dataclass(frozen=True)
class Alphabet:
    size: int
    quiescent: int = 0

    def __post_init__(self):
        check_positive_int(self.size, "alphabet size")
        if not 0 <= self.quiescent < self.size:
            raise ValueError(f"quiescent symbol {self.quiescent} outside alphabet of size {self.size}")


@dataclass(frozen=True)
class Region:
    """Ordered set of integer cell labels with a dimension per cell."""

    cells: tuple = ()
    dims: tuple = ()

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        dims = tuple(int(d) for d in self.dims)
        if len(cells) != len(dims):
            raise ValueError("cells and dims must have equal length")
        if any(b <= a for a, b in zip(cells, cells[1:])):
            raise ValueError(f"cell labels must be strictly increasing: {cells}")
        if any(d < 1 for d in dims):
            raise ValueError(f"wire dimensions must be >= 1: {dims}")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def uniform(cls, cells, dim=2):
        cells = sorted(cells)
        return cls(tuple(cells), (dim,) * len(cells))

    @classmethod
    def from_pairs(cls, pairs):
        pairs = sorted((int(c), int(d)) for c, d in pairs)
        return cls(tuple(c for c, _ in pairs), tuple(d for _, d in pairs))

    def __len__(self):
        return len(self.cells)

    def __contains__(self, cell):
        return cell in self.cells

    def __iter__(self):
        return iter(self.cells)

    @property
    def size(self):
        """Number of words over the region."""
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def dim(self, cell):
        return self.dims[self.cells.index(cell)]

    def position(self, cell):
        return self.cells.index(cell)

    def subregion(self, cells):
        cells = set(cells)
        missing = cells - set(self.cells)
        if missing:
            raise RegionError(f"cells {sorted(missing)} not in region {self.cells}")
        return Region.from_pairs((c, d) for c, d in zip(self.cells, self.dims) if c in cells)

    def without(self, cells):
        cells = set(cells)
        return Region.from_pairs((c, d) for c, d in zip(self.cells, self.dims) if c not in cells)

    def disjoint(self, other):
        return not set(self.cells) & set(other.cells)

    def union(self, other):
        if not self.disjoint(other):
            raise RegionError(f"regions overlap: {self.cells} and {other.cells}")
        return Region.from_pairs(list(zip(self.cells, self.dims)) + list(zip(other.cells, other.dims)))

    def word_index(self, word):
        """Lexicographic index of ``word`` (a sequence aligned with cells, or a mapping)."""
        if isinstance(word, Mapping):
            word = [word[c] for c in self.cells]
        word = tuple(int(x) for x in word)
        if len(word) != len(self.cells):
            raise ValueError(f"word {word} has wrong length for region {self.cells}")
        for c, x, d in zip(self.cells, word, self.dims):
            if not 0 <= x < d:
                raise ValueError(f"symbol {x} out of range for cell {c} (dim {d})")
        if not word:
            return 0
        return int(np.ravel_multi_index(word, self.dims))

    def word(self, index):
        if not self.cells:
            return ()
        return tuple(int(x) for x in np.unravel_index(index, self.dims))

    def words(self):
        return itertools.product(*(range(d) for d in self.dims))


def _readonly(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class State:
    """Probability vector over the words of a region."""

    region: Region
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = check_distribution(self.probs, self.region.size)
        object.__setattr__(self, "probs", _readonly(probs))

    def tensor(self):
        return self.probs.reshape(self.region.dims)

    def prob(self, word):
        return float(self.probs[self.region.word_index(word)])

    def support(self, tol=0.0):
        return {self.region.word(i): float(p) for i, p in enumerate(self.probs) if p > tol}


@dataclass(frozen=True, eq=False)
class StochMap:
    """Left-stochastic matrix between two regions.

    Rows are indexed by output words and columns by input words.
    """

    in_region: Region
    out_region: Region
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = check_stochastic(
            self.matrix, (self.out_region.size, self.in_region.size))
        object.__setattr__(self, "matrix", _readonly(mat))

    @property
    def shape(self):
        return self.matrix.shape

    def tensor(self):
        return self.matrix.reshape(self.out_region.dims + self.in_region.dims)

    def column(self, word):
        """Output distribution for a deterministic input word."""
        return State(self.out_region, self.matrix[:, self.in_region.word_index(word)])

    def allclose(self, other, tol=EXACT_TOL):
        return (self.in_region == other.in_region and self.out_region == other.out_region
                and np.max(np.abs(self.matrix - other.matrix), initial=0.0) <= tol)


def _from_tensor(in_region, out_region, tensor):
    return StochMap(in_region, out_region, np.asarray(tensor).reshape(out_region.size, in_region.size))


def identity_map(region):
    return StochMap(region, region, np.eye(region.size))


def constant_map(in_region, state):
    """Map ignoring its input and always producing ``state``."""
    return StochMap(in_region, state.region, np.tile(state.probs[:, None], (1, in_region.size)))


def deterministic_map(in_region, out_region, fn):
    """Map sending each input word ``u`` to the point mass on ``fn(u)``."""
    mat = np.zeros((out_region.size, in_region.size))
    for j, word in enumerate(in_region.words()):
        mat[out_region.word_index(fn(word)), j] = 1.0
    return StochMap(in_region, out_region, mat)


def point_state(region, word):
    probs = np.zeros(region.size)
    probs[region.word_index(word)] = 1.0
    return State(region, probs)


def mix(p, rho, sigma):
    p = check_probability(p)
    if rho.region != sigma.region:
        raise RegionError("cannot mix states over different regions")
    return State(rho.region, p * rho.probs + (1 - p) * sigma.probs)


def apply(S, rho):
    if rho.region != S.in_region:
        raise RegionError(f"state region {rho.region.cells} does not match map input {S.in_region.cells}")
    return State(S.out_region, S.matrix @ rho.probs)


def compose(T, S):
    """The map ``T∘S`` (apply ``S`` first)."""
    if S.out_region != T.in_region:
        raise RegionError(f"cannot compose: {S.out_region} feeds {T.in_region}")
    return StochMap(S.in_region, T.out_region, T.matrix @ S.matrix)


def _sorted_perm(labels):
    """Permutation putting ``labels`` in increasing order."""
    return sorted(range(len(labels)), key=lambda k: labels[k])


def tensor_map(S, T):
    if not S.in_region.disjoint(T.in_region) or not S.out_region.disjoint(T.out_region):
        raise RegionError("tensor_map requires disjoint input and output regions")
    in_r = S.in_region.union(T.in_region)
    out_r = S.out_region.union(T.out_region)
    so, si = len(S.out_region), len(S.in_region)
    to = len(T.out_region)
    # outer product axes: S.out, S.in, T.out, T.in
    outer = np.multiply.outer(S.tensor(), T.tensor())
    out_labels = S.out_region.cells + T.out_region.cells
    out_axes = [k if k < so else k + si for k in range(so + to)]
    in_labels = S.in_region.cells + T.in_region.cells
    in_axes = [so + k if k < si else so + si + to + (k - si) for k in range(len(in_labels))]
    perm = [out_axes[k] for k in _sorted_perm(out_labels)] + [in_axes[k] for k in _sorted_perm(in_labels)]
    return _from_tensor(in_r, out_r, outer.transpose(perm))


def tensor_state(rho, sigma):
    if not rho.region.disjoint(sigma.region):
        raise RegionError("tensor_state requires disjoint regions")
    region = rho.region.union(sigma.region)
    labels = rho.region.cells + sigma.region.cells
    outer = np.multiply.outer(rho.tensor(), sigma.tensor())
    return State(region, outer.transpose(_sorted_perm(labels)).reshape(-1))


def marginal(rho, cells):
    """Trace out ``cells`` from ``rho``."""
    cells = set(cells)
    rho.region.subregion(cells)
    axes = tuple(rho.region.position(c) for c in sorted(cells))
    return State(rho.region.without(cells), rho.tensor().sum(axis=axes).reshape(-1))


def trace_out_map(S, cells):
    """The map ``ρ ↦ Tr_cells(Sρ)``."""
    cells = set(cells)
    S.out_region.subregion(cells)
    axes = tuple(S.out_region.position(c) for c in sorted(cells))
    out_r = S.out_region.without(cells)
    return _from_tensor(S.in_region, out_r, S.tensor().sum(axis=axes))


def extend(S, region):
    """Trivial extension ``S ⊗ Id`` over the extra ``region``."""
    if not S.in_region.disjoint(region) or not S.out_region.disjoint(region):
        raise RegionError("extension region overlaps the map's regions")
    return tensor_map(S, identity_map(region))


def _split_regions(region, left):
    left = set(left) & set(region.cells)
    return region.subregion(left), region.without(left)


def factor_product(S, left_in, left_out, tol=STOCH_TOL):
    """Try to write ``S = A ⊗ B`` across a cut.

    ``left_in``/``left_out`` name the input/output cells owned by ``A``; all
    remaining cells belong to ``B``. Returns ``(A, B)`` when stochastic
    factors reconstruct ``S`` within ``tol`` in max-norm, else ``None``.

    The map is realigned into a matrix indexed by (left-out, left-in) rows
    and (right-out, right-in) columns; ``S`` is a product exactly when this
    matrix is a nonnegative rank-one dyad.
    """
    left_in, left_out = set(left_in), set(left_out)
    if not left_in <= set(S.in_region.cells) or not left_out <= set(S.out_region.cells):
        raise RegionError("cut names cells outside the map's regions")
    li, ri = _split_regions(S.in_region, left_in)
    lo, ro = _split_regions(S.out_region, left_out)
    out_cells, in_cells = S.out_region.cells, S.in_region.cells
    n_out = len(out_cells)
    axes = ([out_cells.index(c) for c in lo.cells] + [n_out + in_cells.index(c) for c in li.cells]
            + [out_cells.index(c) for c in ro.cells] + [n_out + in_cells.index(c) for c in ri.cells])
    realigned = S.tensor().transpose(axes).reshape(lo.size * li.size, ro.size * ri.size)

    u, s, vt = np.linalg.svd(realigned, full_matrices=False)
    a = u[:, 0] * s[0]
    b = vt[0]
    if a.sum() < 0:
        a, b = -a, -b
    a = a.reshape(lo.size, li.size)
    b = b.reshape(ro.size, ri.size)
    # global scale sits in a; renormalising both columns removes it
    with np.errstate(divide="ignore", invalid="ignore"):
        a = a / a.sum(axis=0, keepdims=True)
        b = b / b.sum(axis=0, keepdims=True)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        return None
    if a.min(initial=0.0) < -tol or b.min(initial=0.0) < -tol:
        return None
    a = np.clip(a, 0.0, None)
    b = np.clip(b, 0.0, None)
    a /= a.sum(axis=0, keepdims=True)
    b /= b.sum(axis=0, keepdims=True)
    A = StochMap(li, lo, a)
    B = StochMap(ri, ro, b)
    err = np.max(np.abs(tensor_map(A, B).matrix - S.matrix), initial=0.0)
    if err > tol:
        return None
    return A, B


@dataclass(frozen=True, eq=False)
class FiniteConfig:
    """Configuration over ℤ that is quiescent outside a finite support."""

    alphabet: Alphabet
    support: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for cell, sym in dict(self.support).items():
            sym = int(sym)
            if not 0 <= sym < self.alphabet.size:
                raise ValueError(f"symbol {sym} at cell {cell} outside alphabet")
            if sym != self.alphabet.quiescent:
                clean[int(cell)] = sym
        object.__setattr__(self, "support", clean)

    @classmethod
    def from_word(cls, alphabet, word: Sequence[int], start=0):
        return cls(alphabet, {start + k: x for k, x in enumerate(word)})

    def __getitem__(self, cell):
        return self.support.get(cell, self.alphabet.quiescent)

    def __eq__(self, other):
        return isinstance(other, FiniteConfig) and self.alphabet == other.alphabet and self.support == other.support

    def __hash__(self):
        return hash((self.alphabet, tuple(sorted(self.support.items()))))


def config_distance(c, c2):
    """``2**-k`` where ``k`` is the smallest radius at which the configurations differ."""
    if c.alphabet != c2.alphabet:
        raise ValueError("configurations are over different alphabets")
    diff = [abs(i) for i in set(c.support) | set(c2.support) if c[i] != c2[i]]
    if not diff:
        return 0.0
    return 2.0 ** -min(diff)
