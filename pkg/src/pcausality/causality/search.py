"""Numerical search for a circuit-shape factorization of a stochastic map.

The search is alternating minimization of ``||G - compose(shape, boxes)||_F^2``
over the boxes, each box update being a least-squares problem with every
column constrained to the probability simplex. The inner solver is
monotone accelerated projected gradient. Any update (box step or the
extrapolation step taken after each sweep) is kept only when it does not
increase the residual, so a restart's history never goes up.

Restarts are independent; a chunk of them is advanced together with the
restart index as a batch axis of every contraction.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..core import StochMap
from .shapes import ShapeError, boxes_as_maps, compose_shape, random_boxes
from .verdict import CausalityVerdict, Outcome, Property

__all__ = ["SearchParams", "ShapeFactorizer", "factor_shape", "project_columns_simplex"]


def project_columns_simplex(X):
    """Euclidean projection onto the probability simplex along axis -2.

    Works on a single ``(rows, cols)`` matrix or a stack of them.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[-2]
    if n == 1:
        return np.ones_like(X)
    U = -np.sort(-X, axis=-2)
    css = np.cumsum(U, axis=-2)
    css -= 1.0
    k = np.arange(1, n + 1, dtype=float)[:, None]
    # number of positive entries of the projection, per column
    rho = np.count_nonzero(U * k > css, axis=-2)
    theta = np.take_along_axis(css, rho[..., None, :] - 1, axis=-2) / rho[..., None, :]
    return np.maximum(X - theta, 0.0)


@dataclass(frozen=True)
class SearchParams:
    restarts: int = 64
    max_sweeps: int = 500
    inner_iters: int = 25
    accept_tol: float = 1e-8
    concentration: float = 1.0
    seed: int = 0
    patience: int = 40
    stop_on_accept: bool = True
    batch_size: int = 16


class _Program:
    """Batched contraction plans for one shape."""

    def __init__(self, shape):
        self.shape = shape
        ids = {w: k for k, w in enumerate(shape.wires)}
        self.batch = len(ids)
        nxt = self.batch + 1
        self.boxes = [b for b in shape.boxes if b.inputs or b.outputs]
        self.sub = {b.name: [self.batch] + [ids[w] for w in b.outputs + b.inputs] for b in self.boxes}
        self.target = ([ids[f"y{c}"] for c in shape.out_region.cells]
                       + [ids[f"x{c}"] for c in shape.in_region.cells])
        self.env_extra = {}
        for b in self.boxes:
            extra, box_ids = [], []
            for w in b.outputs + b.inputs:
                if ids[w] in self.target:
                    extra.append((shape.wires[w], [ids[w], nxt]))
                    box_ids.append(nxt)
                    nxt += 1
                else:
                    box_ids.append(ids[w])
            self.env_extra[b.name] = (extra, box_ids)
        self.gsize = shape.out_region.size * shape.in_region.size
        self._paths = {}

    def _einsum(self, key, operands, out):
        plan = self._paths.get(key)
        if plan is None:
            path = np.einsum_path(*operands, out, optimize="greedy")[0][1:]
            plan = _compile(path, operands[1::2], out)
            self._paths[key] = plan
        return _run(plan, operands[0::2])

    def _tensor(self, name, arr):
        b = self.shape.box(name)
        return arr.reshape((arr.shape[0],) + self.shape.box_dims(b))

    def compose(self, boxes):
        batch = next(iter(boxes.values())).shape[0]
        ops = []
        for b in self.boxes:
            ops += [self._tensor(b.name, boxes[b.name]), self.sub[b.name]]
        if not ops:
            return np.ones((batch, self.gsize))
        return self._einsum(("compose", batch), ops, [self.batch] + self.target).reshape(batch, -1)

    def environment(self, boxes, name):
        batch = next(iter(boxes.values())).shape[0]
        ops = []
        for b in self.boxes:
            if b.name != name:
                ops += [self._tensor(b.name, boxes[b.name]), self.sub[b.name]]
        extra, box_ids = self.env_extra[name]
        for dim, sub in extra:
            ops += [np.eye(dim), sub]
        rows, cols = self.shape.box_shape(self.shape.box(name))
        if not any(s[0] == self.batch for s in ops[1::2]):
            # no other batched operand: broadcast the plain contraction
            if ops:
                env = np.einsum(*ops, self.target + box_ids)
            else:
                env = np.ones(1)
            env = np.broadcast_to(env.reshape(1, self.gsize, rows * cols), (batch, self.gsize, rows * cols))
            return np.ascontiguousarray(env)
        env = self._einsum(("env", name, batch), ops, [self.batch] + self.target + box_ids)
        return env.reshape(batch, self.gsize, rows * cols)


def _compile(path, subs, out):
    """Turn an einsum path into a list of pairwise contraction steps."""
    subs = [list(s) for s in subs]
    steps = []
    for pair in path:
        pair = sorted(pair, reverse=True)
        taken = [subs.pop(k) for k in pair]
        keep = set(out)
        for s in subs:
            keep.update(s)
        seen, res = set(), []
        for s in taken:
            for i in s:
                if i in keep and i not in seen:
                    seen.add(i)
                    res.append(i)
        steps.append((pair, taken, res))
        subs.append(res)
    final = subs[0]
    return steps, [final.index(i) for i in out]


def _run(plan, arrays):
    steps, perm = plan
    arrays = list(arrays)
    for pair, taken, res in steps:
        ops = [arrays.pop(k) for k in pair]
        args = []
        for a, s in zip(ops, taken):
            args += [a, s]
        arrays.append(np.einsum(*args, res))
    return arrays[0].transpose(perm)


def _sq_residual(model, g):
    d = model - g
    return np.einsum("bi,bi->b", d, d)


def _box_update(J, g, x0, rows, cols, iters):
    """Batched monotone FISTA on ``min ||J x - g||^2``, columns on the simplex.

    Runs on the normal equations ``Q = J^T J``, ``c = J^T g``; the objective
    is tracked up to the constant ``g^T g``.
    """
    batch = J.shape[0]
    Jt = np.transpose(J, (0, 2, 1))
    Q = Jt @ J
    c = (Jt @ g[..., None])[..., 0]
    L = np.linalg.eigvalsh(Q)[:, -1]
    L = np.where(L > 0, L, 1.0)[:, None]

    def f(v):
        Qv = (Q @ v[..., None])[..., 0]
        return np.einsum("bn,bn->b", v, Qv - 2.0 * c)

    def proj(v):
        return project_columns_simplex(v.reshape(batch, rows, cols)).reshape(batch, -1)

    x, y, t = x0, x0, 1.0
    fx = f(x)
    for _ in range(iters):
        grad = (Q @ y[..., None])[..., 0] - c
        z = proj(y - grad / L)
        fz = f(z)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        better = (fz <= fx)[:, None]
        x_new = np.where(better, z, x)
        fx = np.where(better[:, 0], fz, fx)
        y = x_new + (t / t_new) * (z - x_new) + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
    return x


class ShapeFactorizer(BaseEstimator):
    """Fit the boxes of a ``CircuitShape`` to a target stochastic map.

    Parameters
    ----------
    shape : CircuitShape
        Wiring whose end-to-end signature matches the target.
    restarts, max_sweeps, inner_iters : int
        Random restarts, alternating sweeps per restart and projected
        gradient steps per box update.
    accept_tol : float
        A restart succeeds once the squared Frobenius residual reaches this.
    concentration : float
        Symmetric Dirichlet concentration for the random initial boxes.
    seed : int
        Restart ``k`` draws its initial boxes from ``default_rng([seed, k])``.
    patience : int
        A restart is abandoned when ``patience`` sweeps fail to lower its
        residual by a relative 1e-3.
    stop_on_accept : bool
        Stop after the first chunk of restarts in which one succeeds.
    batch_size : int
        Restarts advanced together.

    Attributes
    ----------
    boxes_ : dict of ndarray
        Best box matrices found (minimum residual, lowest restart index on ties).
    residual_ : float
        Their squared Frobenius residual.
    best_restart_ : int
    histories_ : list of list of float
        Per-restart residual after initialization and after every sweep.
    """

    def __init__(self, shape, restarts=64, max_sweeps=500, inner_iters=25, accept_tol=1e-8,
                 concentration=1.0, seed=0, patience=40, stop_on_accept=True, batch_size=16):
        self.shape = shape
        self.restarts = restarts
        self.max_sweeps = max_sweeps
        self.inner_iters = inner_iters
        self.accept_tol = accept_tol
        self.concentration = concentration
        self.seed = seed
        self.patience = patience
        self.stop_on_accept = stop_on_accept
        self.batch_size = batch_size

    def _target(self, G):
        if isinstance(G, StochMap):
            if not self.shape.matches(G):
                raise ShapeError("shape signature does not match the target map")
            G = G.matrix
        G = np.asarray(G, dtype=float)
        expected = (self.shape.out_region.size, self.shape.in_region.size)
        if G.shape != expected:
            raise ShapeError(f"target has shape {G.shape}, shape expects {expected}")
        return G

    def _run_chunk(self, prog, g, restart_ids):
        shape = self.shape
        inits = [random_boxes(shape, np.random.default_rng([self.seed, k]), self.concentration)
                 for k in restart_ids]
        boxes = {b.name: np.stack([init[b.name] for init in inits]) for b in shape.boxes}
        batch = len(restart_ids)
        gb = np.broadcast_to(g, (batch, g.size))
        res = _sq_residual(prog.compose(boxes), gb)
        histories = [[float(r)] for r in res]
        active = res > self.accept_tol
        window = res.copy()
        learn = [b for b in shape.boxes if shape.box_shape(b)[0] > 1]
        step = np.full(batch, 0.5)
        for sweep in range(self.max_sweeps):
            if not active.any():
                break
            prev = {k: v.copy() for k, v in boxes.items()}
            for b in learn:
                rows, cols = shape.box_shape(b)
                J = prog.environment(boxes, b.name)
                x = _box_update(J, gb, boxes[b.name].reshape(batch, -1), rows, cols, self.inner_iters)
                trial = dict(boxes)
                trial[b.name] = x.reshape(batch, rows, cols)
                new = _sq_residual(prog.compose(trial), gb)
                keep = active & (new <= res)
                boxes[b.name] = np.where(keep[:, None, None], trial[b.name], boxes[b.name])
                res = np.where(keep, new, res)
            # extrapolate along the last sweep's direction
            trial = {}
            for b in learn:
                moved = boxes[b.name] + step[:, None, None] * (boxes[b.name] - prev[b.name])
                trial[b.name] = project_columns_simplex(moved)
            for b in shape.boxes:
                trial.setdefault(b.name, boxes[b.name])
            new = _sq_residual(prog.compose(trial), gb)
            keep = active & (new <= res)
            for b in learn:
                boxes[b.name] = np.where(keep[:, None, None], trial[b.name], boxes[b.name])
            res = np.where(keep, new, res)
            step = np.where(keep, np.minimum(step * 1.5, 8.0), 0.5)
            for k in np.flatnonzero(active):
                histories[k].append(float(res[k]))
            active &= res > self.accept_tol
            if (sweep + 1) % self.patience == 0:
                stalled = res > window * (1 - 1e-3)
                active &= ~stalled
                window = res.copy()
            if self.stop_on_accept and (res <= self.accept_tol).any():
                break
        return boxes, res, histories

    def fit(self, G, y=None):
        g = self._target(G).reshape(-1)
        prog = _Program(self.shape)
        self.histories_ = []
        best = None
        for start in range(0, self.restarts, self.batch_size):
            ids = list(range(start, min(start + self.batch_size, self.restarts)))
            boxes, res, histories = self._run_chunk(prog, g, ids)
            self.histories_ += histories
            k = int(np.argmin(res))
            if best is None or res[k] < best[1]:
                best = ({name: arr[k].copy() for name, arr in boxes.items()}, float(res[k]), ids[k])
            if self.stop_on_accept and best[1] <= self.accept_tol:
                break
        self.boxes_, self.residual_, self.best_restart_ = best
        self.n_restarts_run_ = len(self.histories_)
        return self

    def reconstruct(self):
        return compose_shape(self.shape, self.boxes_)

    def score(self, G, y=None):
        """Negative squared Frobenius residual against ``G``."""
        d = self.reconstruct() - self._target(G)
        return -float(np.sum(d * d))


def factor_shape(G, shape, search=None, prop=Property.SHAPE, return_estimator=False):
    """Search for boxes realizing ``G`` in ``shape``.

    Returns a proved verdict with the witness boxes, or ``search-exhausted``
    with the best residual found. Never ``refuted``: failing to find a
    factorization is not a proof that none exists. With
    ``return_estimator`` the fitted ``ShapeFactorizer`` is returned too.
    """
    search = search or SearchParams()
    if not shape.matches(G):
        raise ShapeError("shape signature does not match the target map")
    est = ShapeFactorizer(shape, **asdict(search)).fit(G)
    params = asdict(search)
    params["wires"] = shape.hidden_wires()
    params["restarts_run"] = est.n_restarts_run_
    params["best_restart"] = est.best_restart_
    if est.residual_ <= search.accept_tol:
        verdict = CausalityVerdict(prop, Outcome.PROVED, witness=boxes_as_maps(shape, est.boxes_),
                                   residual=est.residual_, params=params, seed=search.seed)
    else:
        verdict = CausalityVerdict(prop, Outcome.SEARCH_EXHAUSTED, residual=est.residual_,
                                   params=params, seed=search.seed)
    return (verdict, est) if return_estimator else verdict
