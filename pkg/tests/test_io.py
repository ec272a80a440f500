import json

import numpy as np
import pytest

from pcausality import gallery
from pcausality.core import Region, State
from pcausality.io import (
    FormatError, load_map, load_state, map_from_dict, map_to_dict, save_map, save_state,
    state_from_dict,
)
from pcausality.validation import StochasticityError

from helpers import random_map, random_region


def test_map_round_trip_is_exact(tmp_path, rng):
    for _ in range(20):
        S = random_map(rng, random_region(rng, [0, 2]), random_region(rng, [1, 4, 5]))
        path = tmp_path / "m.json"
        save_map(S, path)
        T = load_map(path)
        assert T.in_region == S.in_region and T.out_region == S.out_region
        assert np.array_equal(T.matrix, S.matrix)


def test_state_round_trip(tmp_path, rng):
    rho = State(Region.uniform([3, 4], 3), rng.dirichlet(np.ones(9)))
    save_state(rho, tmp_path / "s.json")
    back = load_state(tmp_path / "s.json")
    assert back.region == rho.region and np.array_equal(back.probs, rho.probs)


def test_format_layout():
    d = map_to_dict(gallery.nlbox())
    assert d["alphabet_size"] == 2
    assert d["in_cells"] == [{"label": 1, "dim": 2}, {"label": 2, "dim": 2}]
    assert len(d["matrix"]) == 4


def test_format_errors(tmp_path):
    good = map_to_dict(gallery.nlbox())
    for key in ("in_cells", "out_cells", "matrix"):
        bad = dict(good)
        del bad[key]
        with pytest.raises(FormatError):
            map_from_dict(bad)
    with pytest.raises(FormatError):
        map_from_dict([1, 2])
    with pytest.raises(FormatError):
        map_from_dict(dict(good, matrix=[[1, 0]]))
    with pytest.raises(FormatError):
        map_from_dict(dict(good, matrix=[["a"] * 4] * 4))
    with pytest.raises(FormatError):
        map_from_dict(dict(good, in_cells=[{"label": 1, "dim": 2}, {"label": 1, "dim": 2}]))
    with pytest.raises(FormatError):
        map_from_dict(dict(good, in_cells=[{"label": 1}]))
    bad = json.loads(json.dumps(good))
    bad["matrix"][0][2] += 0.1
    with pytest.raises(StochasticityError) as info:
        map_from_dict(bad)
    assert info.value.column == 2
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(FormatError):
        load_map(path)
    with pytest.raises(FormatError):
        state_from_dict(good)
