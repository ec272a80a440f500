"""Command-line front end.

Exit codes: 0 proved, 1 refuted, 2 search exhausted, 64 usage error,
65 malformed input data.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import gallery
from .causality import (
    CausalityVerdict, Property, SearchParams, bipartite_parity_box, check_all,
    check_non_correlating, check_non_signalling, check_screening_off, check_v_causal, chsh,
    factor_shape, pca_shape, v_shape, vv_shape,
)
from .io import FormatError, load_json, load_map, load_state, map_to_dict, save_json, save_map
from .pca import (
    Boundary, Order, StandardPCA, compose_pca, from_standard, global_map, pca_from_dict,
    pca_to_dict, run,
)
from .validation import STOCH_TOL

EX_USAGE = 64
EX_DATAERR = 65
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read(loader, path):
    try:
        return loader(path)
    except FileNotFoundError as exc:
        raise DataError(f"{path}: no such file") from exc
    except (FormatError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def _load_pca(path):
    return _read(lambda p: pca_from_dict(load_json(p)), path)


def _boundary(args):
    if args.boundary == "periodic":
        return Boundary.periodic()
    return Boundary.fixed(args.left)


def _dims(text):
    try:
        parts = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad wire dimensions {text!r}") from exc
    if any(d < 1 for d in parts):
        raise argparse.ArgumentTypeError("wire dimensions must be positive")
    return parts[0] if len(parts) == 1 else parts


def _search(args):
    kw = {"seed": args.seed}
    if args.restarts is not None:
        kw["restarts"] = args.restarts
    if args.max_sweeps is not None:
        kw["max_sweeps"] = args.max_sweeps
    return SearchParams(**kw)


# --- commands ----------------------------------------------------------------

def cmd_gallery(args):
    if args.name == "list":
        return {"gallery": {name.value: usage for name, usage in gallery.CATALOG.items()}}, 0
    try:
        gm = gallery.build(args.name, n=args.n, k=args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    S = gm.map
    payload = {
        "name": gm.name.value, "n": gm.n, "k": gm.k,
        "shape": list(S.shape),
        "support": {"".join(map(str, w)): p for w, p in S.column(S.in_region.word(0)).support().items()},
    }
    if args.out:
        save_map(S, args.out)
        payload["written"] = str(args.out)
    else:
        payload["map"] = map_to_dict(S)
    return payload, 0


def _verdict_payload(v: CausalityVerdict):
    return v.to_dict(), v.exit_code


def cmd_check(args):
    G = _read(lambda p: load_map(p, args.tol), args.map)
    prop = args.property
    cell = args.cell
    try:
        if prop in ("ns", "nc", "so"):
            fn = {"ns": check_non_signalling, "nc": check_non_correlating, "so": check_screening_off}[prop]
            if cell is None:
                name = {"ns": Property.NON_SIGNALLING, "nc": Property.NON_CORRELATING,
                        "so": Property.SCREENING_OFF}[prop]
                v = check_all(G, name, tol=args.tol)
            else:
                v = fn(G, cell, tol=args.tol)
        elif prop == "v":
            v = check_v_causal(G, args.dims, _search(args), None if cell is None else [cell])
        else:
            if args.shape == "pca":
                shape = pca_shape(G.in_region, *(args.dims if isinstance(args.dims, list) else [args.dims] * 2))
            else:
                if cell is None:
                    raise UsageError("--cell is required for v/vv shapes")
                builder = v_shape if args.shape == "v" else vv_shape
                shape = builder(G.in_region, G.out_region, cell, args.dims)
            v = factor_shape(G, shape, _search(args))
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return _verdict_payload(v)


def cmd_chsh(args):
    S = _read(load_map, args.map)
    try:
        if args.split is not None:
            left = [c for c in S.out_region.cells if c < args.split]
            a = S.in_region.cells[0] if args.a_cell is None else args.a_cell
            b = S.in_region.cells[-1] if args.b_cell is None else args.b_cell
            S = bipartite_parity_box(S, left, a, b)
        value = chsh(S)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return {"chsh": value, "classical_bound": 2.0, "violates": bool(value > 2.0 + 1e-12)}, 0


def _write_or_embed(obj, out, key):
    if out:
        save_json(obj, out)
        return {"written": str(out)}
    return {key: obj}


def cmd_pca(args):
    action = args.action
    try:
        if action == "global":
            p = _load_pca(args.pca)
            G = global_map(p, args.width, _boundary(args))
            return _write_or_embed(map_to_dict(G, p.s), args.out, "map"), 0
        if action == "compose":
            p1, p2 = _load_pca(args.first), _load_pca(args.second)
            q = compose_pca(p2, p1)
            return _write_or_embed(pca_to_dict(q), args.out, "pca"), 0
        if action == "from-standard":
            sp = StandardPCA(_rule(args.rule, args.alphabet), _noise(args), Order(args.order))
            return _write_or_embed(pca_to_dict(from_standard(sp)), args.out, "pca"), 0
        return _simulate(args)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _rule(text, s):
    named = {
        "identity": lambda r, l: l,
        "shift": lambda r, l: r,
        "xor": lambda r, l: (r + l) % s,
    }
    if text in named:
        f = named[text]
        return np.array([[f(r, l) for l in range(s)] for r in range(s)], dtype=np.int64)
    try:
        return np.array(json.loads(text), dtype=np.int64)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise UsageError(f"rule must be identity, shift, xor or a JSON table: {exc}") from exc


def _noise(args):
    s = args.alphabet
    if args.noise is not None:
        return np.array(_read(load_json, args.noise), dtype=float)
    p = args.flip
    if not 0.0 <= p <= 1.0:
        raise UsageError("--flip must lie in [0, 1]")
    if s == 1:
        return np.ones((1, 1))
    N = np.full((s, s), p / (s - 1))
    np.fill_diagonal(N, 1.0 - p)
    return N


def _simulate(args):
    p = _load_pca(args.pca)
    if args.init_state:
        init = _read(load_state, args.init_state)
        w = len(init.region)
    else:
        if args.init is None and args.width is None:
            raise UsageError("give --init, --init-state or --width")
        text = args.init if args.init is not None else "0" * args.width
        if not text.isdigit():
            raise UsageError(f"initial word must be a string of digits, got {text!r}")
        init = [int(ch) for ch in text]
        w = len(init)
        if any(a >= p.s for a in init):
            raise UsageError(f"initial word uses symbols outside the alphabet {p.s}")
    if args.width is not None and args.width != w:
        raise UsageError(f"--width {args.width} disagrees with the initial configuration ({w} cells)")
    stats = run(p, init, args.steps, args.trials, _boundary(args), args.seed)
    if args.format == "csv":
        return stats.to_csv(), 0
    return stats.to_dict(), 0


# --- parser --------------------------------------------------------------------

def _add_common(p, search=False):
    p.add_argument("--tol", type=float, default=STOCH_TOL, help="numerical tolerance")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--json", action="store_true", help="emit the full run report")
    if search:
        p.add_argument("--dims", type=_dims, default=2, help="hidden wire dimension(s), e.g. 4 or 2,2,2,2")
        p.add_argument("--restarts", type=int)
        p.add_argument("--max-sweeps", type=int)


def build_parser():
    parser = _Parser(prog="pcausality", description="Causality checks and PCA tools for stochastic maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gallery", help="build a gallery map ('list' shows names)")
    g.add_argument("name", choices=["list"] + [n.value for n in gallery.GalleryName])
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--out", type=Path)
    _add_common(g)
    g.set_defaults(func=cmd_gallery)

    c = sub.add_parser("check", help="decide a causality property")
    c.add_argument("property", choices=["ns", "nc", "so", "v", "shape"])
    c.add_argument("--map", required=True, type=Path)
    c.add_argument("--cell", type=int, help="cell or cut (default: every cell)")
    c.add_argument("--shape", choices=["v", "vv", "pca"], default="v", help="target for 'check shape'")
    _add_common(c, search=True)
    c.set_defaults(func=cmd_check)

    h = sub.add_parser("chsh", help="CHSH value of a two-party box")
    h.add_argument("--map", required=True, type=Path)
    h.add_argument("--split", type=int, help="coarse-grain: outputs below this cell form party 1")
    h.add_argument("--a-cell", type=int)
    h.add_argument("--b-cell", type=int)
    _add_common(h)
    h.set_defaults(func=cmd_chsh)

    p = sub.add_parser("pca", help="PCA construction and simulation")
    psub = p.add_subparsers(dest="action", required=True)

    def boundary_args(q):
        q.add_argument("--boundary", choices=["periodic", "fixed"], default="periodic")
        q.add_argument("--left", type=int, default=0, help="symbol on the missing left wire (fixed)")

    pg = psub.add_parser("global", help="exact global map")
    pg.add_argument("--pca", required=True, type=Path)
    pg.add_argument("--width", required=True, type=int)
    pg.add_argument("--out", type=Path)
    boundary_args(pg)
    _add_common(pg)

    ps = psub.add_parser("simulate", help="trajectory marginals (exact or Monte Carlo)")
    ps.add_argument("--pca", required=True, type=Path)
    ps.add_argument("--width", type=int)
    ps.add_argument("--init", help="initial word, e.g. 0110 (default all zeros)")
    ps.add_argument("--init-state", type=Path, help="initial state JSON file")
    ps.add_argument("--steps", type=int, default=1)
    ps.add_argument("--trials", type=int, default=0, help="0 for exact propagation")
    ps.add_argument("--format", choices=["csv", "json"], default="csv")
    boundary_args(ps)
    _add_common(ps)

    pc = psub.add_parser("compose", help="supercell PCA of SECOND after FIRST")
    pc.add_argument("first", type=Path)
    pc.add_argument("second", type=Path)
    pc.add_argument("--out", type=Path)
    _add_common(pc)

    pf = psub.add_parser("from-standard", help="operational form of a rule plus per-cell noise")
    pf.add_argument("--rule", default="identity", help="identity, shift, xor or a JSON table f[r][l]")
    pf.add_argument("--alphabet", type=int, default=2)
    pf.add_argument("--flip", type=float, default=0.0, help="symmetric noise level")
    pf.add_argument("--noise", type=Path, help="JSON noise matrix (overrides --flip)")
    pf.add_argument("--order", choices=[o.value for o in Order], default=Order.CA_THEN_NOISE.value)
    pf.add_argument("--out", type=Path)
    _add_common(pf)
    for q in (pg, ps, pc, pf):
        q.set_defaults(func=cmd_pca)
    return parser


def _inputs(args):
    paths = [getattr(args, k, None) for k in ("map", "pca", "first", "second", "init_state", "noise")]
    return {str(p): _digest(p) for p in paths if p is not None and Path(p).is_file()}


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    start = time.perf_counter()
    try:
        payload, code = args.func(args)
    except UsageError as exc:
        print(f"pcausality: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except DataError as exc:
        print(f"pcausality: data error: {exc}", file=sys.stderr)
        return EX_DATAERR
    if isinstance(payload, str):
        sys.stdout.write(payload)
        return code
    if args.json:
        payload = {
            "command": ["pcausality"] + argv,
            "inputs": _inputs(args),
            "seed": args.seed,
            "result": payload,
            "wall_time": time.perf_counter() - start,
        }
    print(json.dumps(payload, indent=1))
    return code

