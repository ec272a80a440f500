"""Wiring diagrams of stochastic boxes used as factorization targets.

A shape lists boxes, each reading and writing named wires. External input
cell ``c`` is the wire ``x{c}`` and external output cell ``c`` is ``y{c}``;
every other wire is hidden. Box matrices are stored like ``StochMap``
matrices: rows are output-wire words, columns input-wire words, both in the
order the box declares its wires.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Region, StochMap
from ..validation import check_stochastic, random_stochastic

__all__ = [
    "Box", "CircuitShape", "ShapeError", "in_wire", "out_wire",
    "v_shape", "vv_shape", "pca_shape", "compose_shape", "random_boxes",
]


class ShapeError(ValueError):
    pass


def in_wire(cell):
    return f"x{cell}"


def out_wire(cell):
    return f"y{cell}"


@dataclass(frozen=True)
class Box:
    name: str
    inputs: tuple = ()
    outputs: tuple = ()


@dataclass(frozen=True, eq=False)
class CircuitShape:
    boxes: tuple
    wires: dict
    in_region: Region
    out_region: Region
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "wires", dict(self.wires))
        object.__setattr__(self, "layers", tuple(tuple(l) for l in self.layers))
        names = [b.name for b in self.boxes]
        if len(set(names)) != len(names):
            raise ShapeError("duplicate box names")
        for c, d in zip(self.in_region.cells, self.in_region.dims):
            self.wires.setdefault(in_wire(c), d)
        for c, d in zip(self.out_region.cells, self.out_region.dims):
            self.wires.setdefault(out_wire(c), d)
        producers, consumers = {}, {}
        for b in self.boxes:
            for w in b.outputs:
                if w in producers:
                    raise ShapeError(f"wire {w} produced twice")
                producers[w] = b.name
            for w in b.inputs:
                if w in consumers:
                    raise ShapeError(f"wire {w} consumed twice")
                consumers[w] = b.name
        ext_in = {in_wire(c) for c in self.in_region.cells}
        ext_out = {out_wire(c) for c in self.out_region.cells}
        for w in self.wires:
            is_in, is_out = w in ext_in, w in ext_out
            if is_in and (w in producers or w not in consumers):
                raise ShapeError(f"input wire {w} must be consumed once and never produced")
            if is_out and (w in consumers or w not in producers):
                raise ShapeError(f"output wire {w} must be produced once and never consumed")
            if not (is_in or is_out) and (w not in producers or w not in consumers):
                raise ShapeError(f"hidden wire {w} needs one producer and one consumer")
        unknown = (set(producers) | set(consumers)) - set(self.wires)
        if unknown:
            raise ShapeError(f"undeclared wires {sorted(unknown)}")
        # layering must partition the boxes and respect wire direction
        flat = [n for layer in self.layers for n in layer]
        if sorted(flat) != sorted(names):
            raise ShapeError("layers must partition the boxes")
        depth = {n: k for k, layer in enumerate(self.layers) for n in layer}
        for w, consumer in consumers.items():
            if w in producers and depth[producers[w]] >= depth[consumer]:
                raise ShapeError(f"wire {w} flows backwards between layers")

    def box(self, name):
        for b in self.boxes:
            if b.name == name:
                return b
        raise KeyError(name)

    def box_shape(self, box):
        rows = int(np.prod([self.wires[w] for w in box.outputs], dtype=np.int64))
        cols = int(np.prod([self.wires[w] for w in box.inputs], dtype=np.int64))
        return rows, cols

    def box_dims(self, box):
        return tuple(self.wires[w] for w in box.outputs + box.inputs)

    def hidden_wires(self):
        external = {in_wire(c) for c in self.in_region.cells} | {out_wire(c) for c in self.out_region.cells}
        return {w: d for w, d in self.wires.items() if w not in external}

    def matches(self, G):
        return G.in_region == self.in_region and G.out_region == self.out_region

    def to_dict(self):
        return {
            "boxes": [{"name": b.name, "inputs": list(b.inputs), "outputs": list(b.outputs)}
                      for b in self.boxes],
            "wires": dict(self.wires),
            "layers": [list(l) for l in self.layers],
        }


def _wire_dims(dims, names):
    if isinstance(dims, dict):
        return {n: int(dims[n]) for n in names}
    if np.ndim(dims) == 0:
        return {n: int(dims) for n in names}
    dims = list(dims)
    if len(dims) != len(names):
        raise ShapeError(f"expected {len(names)} wire dimensions, got {len(dims)}")
    return {n: int(d) for n, d in zip(names, dims)}


def v_shape(in_region, out_region, i, dims=2):
    """Two-layer V wiring screened by input cell ``i``.

    ``A`` reads inputs left of ``i`` and emits the outputs left of ``i`` plus
    wire ``l'``; ``C`` reads input ``i`` and emits ``l`` and ``r``; ``B``
    reads inputs right of ``i`` and emits ``r'`` plus outputs right of
    ``i+1``. ``L`` combines ``l', l`` into output ``i`` and ``R`` combines
    ``r, r'`` into output ``i+1``. ``dims`` gives ``l', l, r, r'``.
    """
    if i not in in_region:
        raise ShapeError(f"screening cell {i} is not an input cell")
    wires = _wire_dims(dims, ["l'", "l", "r", "r'"])
    outs = out_region.cells
    boxes = (
        Box("A", tuple(in_wire(c) for c in in_region.cells if c < i),
            tuple(out_wire(c) for c in outs if c < i) + ("l'",)),
        Box("C", (in_wire(i),), ("l", "r")),
        Box("B", tuple(in_wire(c) for c in in_region.cells if c > i),
            ("r'",) + tuple(out_wire(c) for c in outs if c > i + 1)),
        Box("L", ("l'", "l"), tuple(out_wire(c) for c in outs if c == i)),
        Box("R", ("r", "r'"), tuple(out_wire(c) for c in outs if c == i + 1)),
    )
    return CircuitShape(boxes, wires, in_region, out_region, (("A", "C", "B"), ("L", "R")))


def vv_shape(in_region, out_region, i, dims=2):
    """V wiring with two adjacent screens at ``i`` and ``i+1``.

    The screens ``C1``, ``C2`` feed a middle combiner ``M`` for output
    ``i+1``; ``L`` and ``R`` produce outputs ``i`` and ``i+2``. ``dims``
    gives ``l', l1, r1, l2, r2, r'``.
    """
    for c in (i, i + 1):
        if c not in in_region:
            raise ShapeError(f"screening cell {c} is not an input cell")
    wires = _wire_dims(dims, ["l'", "l1", "r1", "l2", "r2", "r'"])
    outs = out_region.cells

    def _out(pred):
        return tuple(out_wire(c) for c in outs if pred(c))

    boxes = (
        Box("A", tuple(in_wire(c) for c in in_region.cells if c < i), _out(lambda c: c < i) + ("l'",)),
        Box("C1", (in_wire(i),), ("l1", "r1")),
        Box("C2", (in_wire(i + 1),), ("l2", "r2")),
        Box("B", tuple(in_wire(c) for c in in_region.cells if c > i + 1),
            ("r'",) + _out(lambda c: c > i + 2)),
        Box("L", ("l'", "l1"), _out(lambda c: c == i)),
        Box("M", ("r1", "l2"), _out(lambda c: c == i + 1)),
        Box("R", ("r2", "r'"), _out(lambda c: c == i + 2)),
    )
    return CircuitShape(boxes, wires, in_region, out_region,
                        (("A", "C1", "C2", "B"), ("L", "M", "R")))


def pca_shape(region, dl=2, dr=2):
    """Per-cell splitter/combiner layers on a segment with open ends.

    ``C{j}`` splits cell ``j`` into ``l{j}``, ``r{j}``; ``D{j}`` combines
    ``r{j-1}`` and ``l{j}`` into output ``j``. The first combiner has no left
    wire and the last splitter no right wire.
    """
    cells = region.cells
    if not cells:
        raise ShapeError("empty region")
    wires, cs, ds = {}, [], []
    for k, c in enumerate(cells):
        last = k == len(cells) - 1
        wires[f"l{c}"] = dl
        outs = (f"l{c}",) if last else (f"l{c}", f"r{c}")
        if not last:
            wires[f"r{c}"] = dr
        cs.append(Box(f"C{c}", (in_wire(c),), outs))
        ins = (f"l{c}",) if k == 0 else (f"r{cells[k - 1]}", f"l{c}")
        ds.append(Box(f"D{c}", ins, (out_wire(c),)))
    return CircuitShape(tuple(cs + ds), wires, region, region,
                        (tuple(b.name for b in cs), tuple(b.name for b in ds)))


def _wire_ids(shape):
    return {w: k for k, w in enumerate(shape.wires)}


def _box_tensor(shape, box, matrix):
    return np.asarray(matrix, dtype=float).reshape(shape.box_dims(box))


def _target_sublist(shape, ids):
    return ([ids[out_wire(c)] for c in shape.out_region.cells]
            + [ids[in_wire(c)] for c in shape.in_region.cells])


def compose_shape(shape, boxes):
    """Contract the circuit into the matrix of its end-to-end map."""
    ids = _wire_ids(shape)
    operands = []
    for b in shape.boxes:
        if not b.inputs and not b.outputs:
            continue
        operands += [_box_tensor(shape, b, boxes[b.name]), [ids[w] for w in b.outputs + b.inputs]]
    target = _target_sublist(shape, ids)
    if not operands:
        return np.ones((1, 1))
    tensor = np.einsum(*operands, target, optimize="greedy")
    return tensor.reshape(shape.out_region.size, shape.in_region.size)


def environment(shape, boxes, name):
    """Matrix ``J`` with ``vec(G) = J @ vec(box)`` for the named box.

    Wires the box shares with the outside world are tied to the target's
    indices through identity tensors.
    """
    ids = _wire_ids(shape)
    nxt = len(ids)
    operands = []
    for b in shape.boxes:
        if b.name == name or (not b.inputs and not b.outputs):
            continue
        operands += [_box_tensor(shape, b, boxes[b.name]), [ids[w] for w in b.outputs + b.inputs]]
    target = _target_sublist(shape, ids)
    box = shape.box(name)
    box_ids = []
    for w in box.outputs + box.inputs:
        if ids[w] in target:
            operands += [np.eye(shape.wires[w]), [ids[w], nxt]]
            box_ids.append(nxt)
            nxt += 1
        else:
            box_ids.append(ids[w])
    rows, cols = shape.box_shape(box)
    gsize = shape.out_region.size * shape.in_region.size
    if not operands:
        return np.ones((gsize, rows * cols))
    env = np.einsum(*operands, target + box_ids, optimize="greedy")
    return env.reshape(gsize, rows * cols)


def random_boxes(shape, rng, concentration=1.0):
    boxes = {}
    for b in shape.boxes:
        rows, cols = shape.box_shape(b)
        boxes[b.name] = random_stochastic(rows, cols, rng, concentration)
    return boxes


def boxes_as_maps(shape, boxes):
    """Witness boxes as ``StochMap`` objects over positional pseudo-cells."""
    maps = {}
    for b in shape.boxes:
        rows, cols = shape.box_shape(b)
        in_r = Region(tuple(range(len(b.inputs))), tuple(shape.wires[w] for w in b.inputs))
        out_r = Region(tuple(range(len(b.outputs))), tuple(shape.wires[w] for w in b.outputs))
        maps[b.name] = StochMap(in_r, out_r, check_stochastic(boxes[b.name], (rows, cols)))
    return maps
