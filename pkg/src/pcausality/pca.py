"""Operational probabilistic cellular automata ``G = (⊗D)(⊗C)``.

Cell ``j`` of a width-``w`` array is split by ``C`` into a left wire
``l_j`` and a right wire ``r_j``; the combiner ``D`` then reads
``(r_{j-1}, l_j)`` and writes output cell ``j``. Matrix layouts:

* ``C`` has ``dl*dr`` rows indexed ``l*dr + r`` and ``s`` columns;
* ``D`` has ``s`` rows and ``dr*dl`` columns indexed ``r*dl + l``.

On a ring ``r_{w-1}`` feeds ``D_0``. On a segment (fixed boundary) ``D_0``
reads a declared symbol on its right-wire input and ``r_{w-1}`` is
discarded.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import Alphabet, Region, State, StochMap, point_state
from .validation import check_positive_int, check_stochastic

__all__ = [
    "PCA", "StandardPCA", "Order", "Boundary", "BoundaryKind", "BudgetError", "TrajectoryStats",
    "EXACT_BUDGET", "identity_pca", "shift_pca", "random_pca", "global_map", "compose_pca",
    "from_standard", "step_exact", "sample_step", "run", "v_witness_from_pca",
    "pca_to_dict", "pca_from_dict",
]

EXACT_BUDGET = 4096


class BudgetError(ValueError):
    """The dense state space ``s**w`` exceeds the exact-mode budget."""


class BoundaryKind(str, Enum):
    PERIODIC = "periodic"
    FIXED = "fixed"


@dataclass(frozen=True)
class Boundary:
    """Periodic ring, or a segment whose missing left wire carries ``left``."""

    kind: BoundaryKind = BoundaryKind.PERIODIC
    left: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", BoundaryKind(self.kind))

    @classmethod
    def periodic(cls):
        return cls(BoundaryKind.PERIODIC)

    @classmethod
    def fixed(cls, left=0):
        return cls(BoundaryKind.FIXED, left)

    @property
    def is_periodic(self):
        return self.kind is BoundaryKind.PERIODIC


@dataclass(frozen=True, eq=False)
class PCA:
    alphabet: Alphabet
    dl: int
    dr: int
    C: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not isinstance(self.alphabet, Alphabet):
            object.__setattr__(self, "alphabet", Alphabet(int(self.alphabet)))
        s = self.alphabet.size
        check_positive_int(self.dl, "dl")
        check_positive_int(self.dr, "dr")
        C = check_stochastic(self.C, (self.dl * self.dr, s), name="C")
        D = check_stochastic(self.D, (s, self.dr * self.dl), name="D")
        for name, mat in (("C", C), ("D", D)):
            mat = np.array(mat, dtype=float)
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    @property
    def s(self):
        return self.alphabet.size

    def c_tensor(self):
        """``C`` with axes ``(l, r, x)``."""
        return self.C.reshape(self.dl, self.dr, self.s)

    def d_tensor(self):
        """``D`` with axes ``(y, r, l)``."""
        return self.D.reshape(self.s, self.dr, self.dl)

    def c_map(self):
        """``C`` as a map from pseudo-cell 0 to wires ``l`` (cell 0), ``r`` (cell 1)."""
        return StochMap(Region((0,), (self.s,)), Region((0, 1), (self.dl, self.dr)), self.C)

    def d_map(self):
        """``D`` as a map from wires ``r`` (cell 0), ``l`` (cell 1) to one cell."""
        return StochMap(Region((0, 1), (self.dr, self.dl)), Region((0,), (self.s,)), self.D)

    def allclose(self, other, tol=1e-12):
        return (self.s == other.s and self.dl == other.dl and self.dr == other.dr
                and np.allclose(self.C, other.C, rtol=0, atol=tol)
                and np.allclose(self.D, other.D, rtol=0, atol=tol))


def _copy_c(s):
    C = np.zeros((s * s, s))
    for x in range(s):
        C[x * s + x, x] = 1.0
    return C


def _projection_d(s, onto):
    D = np.zeros((s, s * s))
    for r in range(s):
        for l in range(s):
            D[l if onto == "l" else r, r * s + l] = 1.0
    return D


def identity_pca(s=2):
    """Copy to both wires, keep the left wire: the identity on any width."""
    return PCA(Alphabet(s), s, s, _copy_c(s), _projection_d(s, "l"))


def shift_pca(s=2):
    """Copy to both wires, keep the right wire: each cell takes its left neighbour's value."""
    return PCA(Alphabet(s), s, s, _copy_c(s), _projection_d(s, "r"))


def random_pca(rng, s=2, dl=None, dr=None, concentration=1.0):
    from .validation import random_stochastic
    dl = s if dl is None else dl
    dr = s if dr is None else dr
    return PCA(Alphabet(s), dl, dr, random_stochastic(dl * dr, s, rng, concentration),
               random_stochastic(s, dr * dl, rng, concentration))


# --- tensor network over the C/D layers -------------------------------------

def _check_width(p, w):
    check_positive_int(w, "width")
    if p.s ** w > EXACT_BUDGET:
        raise BudgetError(f"{p.s}**{w} states exceed the exact budget {EXACT_BUDGET}")


def _check_boundary(p, b):
    if not b.is_periodic and not 0 <= b.left < p.dr:
        raise ValueError(f"boundary symbol {b.left} outside right-wire range {p.dr}")


def _network(p, w, b, c_cells, d_cells):
    """Operands (tensor, label list) for the chosen splitters and combiners.

    Labels are tuples ``("x"|"y"|"l"|"r", cell)``.
    """
    Ct, Dt = p.c_tensor(), p.d_tensor()
    ops = []
    for j in c_cells:
        if not b.is_periodic and j == w - 1:
            ops.append((Ct.sum(axis=1), [("l", j), ("x", j)]))
        else:
            ops.append((Ct, [("l", j), ("r", j), ("x", j)]))
    for j in d_cells:
        if j == 0 and not b.is_periodic:
            ops.append((Dt[:, b.left, :], [("y", 0), ("l", 0)]))
        else:
            ops.append((Dt, [("y", j), ("r", (j - 1) % w), ("l", j)]))
    return ops


def _contract(ops, out):
    ids = {}
    args = []
    for arr, labels in ops:
        args += [arr, [ids.setdefault(lab, len(ids)) for lab in labels]]
    for lab in out:
        ids.setdefault(lab, len(ids))
    return np.einsum(*args, [ids[lab] for lab in out], optimize="greedy")


def _region(p, w):
    return Region.uniform(range(w), p.s)


def global_map(p, w, b=Boundary()):
    """Exact global map on ``w`` cells labelled ``0..w-1``."""
    _check_width(p, w)
    _check_boundary(p, b)
    cells = range(w)
    out = [("y", j) for j in cells] + [("x", j) for j in cells]
    G = _contract(_network(p, w, b, cells, cells), out)
    R = _region(p, w)
    return StochMap(R, R, G.reshape(R.size, R.size))


def step_exact(p, rho, b=Boundary()):
    """``G ρ`` by contracting the layers against ``ρ`` without forming ``G``."""
    w = len(rho.region)
    _check_width(p, w)
    _check_boundary(p, b)
    R = _region(p, w)
    if rho.region != R:
        raise ValueError(f"state must live on cells 0..{w - 1} with dimension {p.s}")
    cells = range(w)
    ops = _network(p, w, b, cells, cells) + [(rho.tensor(), [("x", j) for j in cells])]
    out = _contract(ops, [("y", j) for j in cells])
    return State(R, np.clip(out.reshape(-1), 0.0, None))


# --- sampling ----------------------------------------------------------------

def _draw(cdf, cols, u):
    """Inverse-CDF draw: row index of ``cdf[:, cols]`` at uniforms ``u``."""
    idx = (u[None, ...] >= cdf[:, cols]).sum(axis=0)
    return np.minimum(idx, cdf.shape[0] - 1)


def _sample_from_uniforms(p, config, uc, ud, b):
    config = np.asarray(config, dtype=np.int64)
    w = config.shape[-1]
    c_cdf = np.cumsum(p.C, axis=0)
    d_cdf = np.cumsum(p.D, axis=0)
    k = _draw(c_cdf, config, uc)
    left, right = k // p.dr, k % p.dr
    if b.is_periodic:
        prev = np.roll(right, 1, axis=-1)
    else:
        prev = np.concatenate([np.full(right.shape[:-1] + (1,), b.left, dtype=np.int64),
                               right[..., :w - 1]], axis=-1)
    return _draw(d_cdf, prev * p.dl + left, ud)


def sample_step(p, config, rng, b=Boundary()):
    """One ancestral sample of the global map at ``config``.

    ``config`` is a word of length ``w`` or an ``(n, w)`` array of words.
    """
    _check_boundary(p, b)
    config = np.asarray(config, dtype=np.int64)
    if config.ndim not in (1, 2) or config.shape[-1] < 1:
        raise ValueError("config must be a word or a 2D batch of words")
    if config.min() < 0 or config.max() >= p.s:
        raise ValueError("config symbols outside the alphabet")
    u = rng.random((2,) + config.shape)
    return _sample_from_uniforms(p, config, u[0], u[1], b)


# --- trajectories --------------------------------------------------------------

@dataclass
class TrajectoryStats:
    """Per-step per-cell marginals; ``stderr`` is zero in exact mode."""

    mode: str
    width: int
    alphabet_size: int
    steps: int
    trials: int
    seed: int | None
    marginals: np.ndarray
    stderr: np.ndarray
    states: list = field(default_factory=list, repr=False)

    def to_dict(self):
        out = {
            "mode": self.mode, "width": self.width, "alphabet_size": self.alphabet_size,
            "steps": self.steps, "trials": self.trials, "seed": self.seed,
            "marginals": self.marginals.tolist(), "stderr": self.stderr.tolist(),
        }
        if self.states:
            out["states"] = [s.probs.tolist() for s in self.states]
        return out

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["step", "cell", "symbol", "prob", "stderr"])
        for t in range(self.steps + 1):
            for c in range(self.width):
                for a in range(self.alphabet_size):
                    writer.writerow([t, c, a, repr(float(self.marginals[t, c, a])),
                                     repr(float(self.stderr[t, c, a]))])
        return buf.getvalue()


def _cell_marginals(rho):
    T = rho.tensor()
    w = T.ndim
    return np.stack([T.sum(axis=tuple(k for k in range(w) if k != c)) for c in range(w)])


def _init_state(p, init):
    if isinstance(init, State):
        return init
    word = tuple(int(a) for a in init)
    return point_state(_region(p, len(word)), word)


def run(p, init, steps, trials=0, b=Boundary(), seed=0):
    """Evolve ``init`` for ``steps`` steps.

    With ``trials == 0`` the exact law is propagated. Otherwise ``trials``
    independent trajectories are sampled; trial ``k`` draws all of its
    randomness from ``default_rng([seed, k])``, so results do not depend on
    how trials are batched.
    """
    check_positive_int(steps, "steps", minimum=0)
    check_positive_int(trials, "trials", minimum=0)
    if trials == 0:
        rho = _init_state(p, init)
        w = len(rho.region)
        states = [rho]
        for _ in range(steps):
            states.append(step_exact(p, states[-1], b))
        marg = np.stack([_cell_marginals(s) for s in states])
        return TrajectoryStats("exact", w, p.s, steps, 0, None, marg, np.zeros_like(marg), states)

    _check_boundary(p, b)
    if isinstance(init, State):
        w = len(init.region)
        cdf = np.cumsum(init.probs)
    else:
        word = np.asarray(init, dtype=np.int64)
        w = word.size
    configs = np.empty((trials, w), dtype=np.int64)
    uniforms = np.empty((trials, steps, 2, w))
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        if isinstance(init, State):
            idx = min(int(np.searchsorted(cdf, rng.random(), side="right")), cdf.size - 1)
            configs[k] = init.region.word(idx)
        else:
            configs[k] = word
        uniforms[k] = rng.random((steps, 2, w))
    counts = np.zeros((steps + 1, w, p.s))
    cells = np.arange(w)
    for t in range(steps + 1):
        if t > 0:
            configs = _sample_from_uniforms(p, configs, uniforms[:, t - 1, 0], uniforms[:, t - 1, 1], b)
        np.add.at(counts[t], (np.broadcast_to(cells, configs.shape), configs), 1.0)
    marg = counts / trials
    err = np.sqrt(marg * (1.0 - marg) / trials)
    return TrajectoryStats("monte-carlo", w, p.s, steps, trials, seed, marg, err)


# --- constructions -------------------------------------------------------------

def compose_pca(p2, p1):
    """Supercell PCA equal to ``p2`` after ``p1`` on even rings.

    Supercell ``j`` holds cells ``2j, 2j+1`` with symbol ``x_{2j}*s + x_{2j+1}``.
    The new splitter runs both ``p1`` splitters of the supercell, ``p1``'s
    interior combiner at ``2j+1`` and ``p2``'s splitter on its output; it emits
    ``L = (l_{2j}, l'_{2j+1})`` and ``R = (r_{2j+1}, r'_{2j+1})`` (primes mark
    ``p2`` wires). The new combiner reads ``R`` of the left supercell and
    ``L`` of its own, runs ``p1``'s straddling combiner at ``2j``, ``p2``'s
    splitter on that output and both ``p2`` combiners of the supercell.
    """
    if p1.s != p2.s:
        raise ValueError(f"alphabet mismatch: {p1.s} vs {p2.s}")
    s = p1.s
    C1, D1, C2, D2 = p1.c_tensor(), p1.d_tensor(), p2.c_tensor(), p2.d_tensor()
    # a=l_2j b=l'_2j+1 c=r_2j+1 d=r'_2j+1 e=r_2j f=l_2j+1 g=y_2j+1 x,z=inputs
    newC = np.einsum("aex,fcz,gef,bdg->abcdxz", C1, C1, D1, C2)
    # c=r_2j-1 d=r'_2j-1 a=l_2j b=l'_2j+1 g=y_2j h=l'_2j k=r'_2j u,v=outputs
    newD = np.einsum("gca,hkg,udh,vkb->uvcdab", D1, C2, D2, D2)
    dl, dr = p1.dl * p2.dl, p1.dr * p2.dr
    return PCA(Alphabet(s * s), dl, dr, newC.reshape(dl * dr, s * s), newD.reshape(s * s, dr * dl))


class Order(str, Enum):
    CA_THEN_NOISE = "ca-then-noise"
    NOISE_THEN_CA = "noise-then-ca"


@dataclass(frozen=True, eq=False)
class StandardPCA:
    """Deterministic rule plus independent per-cell noise.

    ``rule`` is an ``(s, s)`` table ``f(x_{i-1}, x_i)`` or an ``(s,)`` table
    ``g(x_i)``; ``noise`` is an ``s x s`` stochastic matrix.
    """

    rule: np.ndarray
    noise: np.ndarray
    order: Order = Order.CA_THEN_NOISE

    def __post_init__(self):
        rule = np.asarray(self.rule)
        if rule.ndim == 1:
            rule = np.tile(rule, (rule.size, 1))
        if rule.ndim != 2 or rule.shape[0] != rule.shape[1]:
            raise ValueError("rule must be a table over one cell or over two neighbouring cells")
        s = rule.shape[0]
        if not np.issubdtype(rule.dtype, np.integer) or rule.min() < 0 or rule.max() >= s:
            raise ValueError("rule values must be symbols of the alphabet")
        noise = check_stochastic(self.noise, (s, s), name="noise")
        object.__setattr__(self, "rule", rule.astype(np.int64))
        object.__setattr__(self, "noise", np.array(noise, dtype=float))
        object.__setattr__(self, "order", Order(self.order))

    @property
    def s(self):
        return self.rule.shape[0]


def from_standard(sp):
    s = sp.s
    rule = np.zeros((s, s * s))
    for r in range(s):
        for l in range(s):
            rule[sp.rule[r, l], r * s + l] = 1.0
    copy = _copy_c(s)
    if sp.order is Order.CA_THEN_NOISE:
        return PCA(Alphabet(s), s, s, copy, sp.noise @ rule)
    return PCA(Alphabet(s), s, s, copy @ sp.noise, rule)


def v_witness_from_pca(p, w, i, b=Boundary.fixed(), tol=1e-12):
    """V factorization of the segment map screened at interior cell ``i``.

    ``C`` is the splitter of cell ``i``; ``L`` and ``R`` are the combiners of
    cells ``i`` and ``i+1``; ``A`` is every splitter and combiner left of
    ``i`` with ``l' = r_{i-1}``; ``B`` is every splitter right of ``i`` and
    combiner right of ``i+1`` with ``r' = l_{i+1}``. Returns ``(shape,
    boxes, residual)`` and raises if reconstruction misses ``tol``.
    """
    from .causality.shapes import compose_shape, v_shape

    if b.is_periodic:
        raise ValueError("the V witness needs a segment (fixed boundary)")
    if not 0 < i < w - 1:
        raise ValueError(f"screening cell {i} is not interior to 0..{w - 1}")
    _check_width(p, w)
    R = _region(p, w)
    shape = v_shape(R, R, i, {"l'": p.dr, "l": p.dl, "r": p.dr, "r'": p.dl})
    left, right = range(i), range(i + 1, w)
    A = _contract(_network(p, w, b, left, left),
                  [("y", j) for j in left] + [("r", i - 1)] + [("x", j) for j in left])
    B = _contract(_network(p, w, b, right, range(i + 2, w)),
                  [("l", i + 1)] + [("y", j) for j in range(i + 2, w)] + [("x", j) for j in right])
    boxes = {"A": A, "C": p.C, "B": B, "L": p.D, "R": p.D}
    boxes = {k: np.reshape(v, shape.box_shape(shape.box(k))) for k, v in boxes.items()}
    G = global_map(p, w, b)
    residual = float(np.max(np.abs(compose_shape(shape, boxes) - G.matrix)))
    if residual > tol:
        raise ArithmeticError(f"V witness reconstruction error {residual:.3e}")
    return shape, boxes, residual


def pca_to_dict(p):
    return {"alphabet_size": p.s, "dl": p.dl, "dr": p.dr, "C": p.C.tolist(), "D": p.D.tolist()}


def pca_from_dict(data):
    """Inverse of ``pca_to_dict``; stochasticity errors name the bad column."""
    from .io import FormatError
    if not isinstance(data, dict):
        raise FormatError("expected a JSON object")
    missing = [k for k in ("alphabet_size", "dl", "dr", "C", "D") if k not in data]
    if missing:
        raise FormatError(f"missing keys {missing}")
    try:
        C = np.array(data["C"], dtype=float)
        D = np.array(data["D"], dtype=float)
        s, dl, dr = int(data["alphabet_size"]), int(data["dl"]), int(data["dr"])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"non-numeric PCA field: {exc}") from exc
    return PCA(Alphabet(s), dl, dr, C, D)
