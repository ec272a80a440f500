"""Named counterexample maps on ``n`` binary cells labelled ``1..n``.

Each constructor returns the map defined by its output distribution:
inputs that are ignored produce identical columns. For the boxes with
inputs, ``a`` is read from the leftmost cell and ``b`` from the rightmost.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Region, StochMap
from .validation import check_positive_int

__all__ = [
    "GalleryName", "GalleryMap", "parity", "magic_coins", "nlbox", "gen_nlbox",
    "vbox", "vk_box", "quiescent_embed", "build", "CATALOG", "QUIESCENT",
]

QUIESCENT = 0


class GalleryName(str, Enum):
    PARITY = "parity"
    MAGIC_COINS = "magiccoins"
    NLBOX = "nlbox"
    GEN_NLBOX = "gennlbox"
    VBOX = "vbox"
    VK_BOX = "vkbox"


def _cells(n):
    return Region.uniform(range(1, n + 1), 2)


def _parity_words(n):
    words = np.array(list(np.ndindex(*(2,) * n)), dtype=int).reshape(-1, n)
    return words.sum(axis=1) % 2


def _uniform_parity(n, bit):
    """Uniform distribution over the n-bit words of the given parity."""
    mask = _parity_words(n) == bit
    return mask / mask.sum()


def _check_n(n):
    return check_positive_int(n, "n", minimum=2)


def parity(n):
    """Uniform over the even-parity words, whatever the input."""
    n = _check_n(n)
    region = _cells(n)
    col = _uniform_parity(n, 0)
    return StochMap(region, region, np.tile(col[:, None], (1, region.size)))


def magic_coins(n):
    """Cells 1 and n show one shared fair coin; interior cells output 0."""
    n = _check_n(n)
    region = _cells(n)
    col = np.zeros(region.size)
    col[region.word_index((0,) * n)] = 0.5
    col[region.word_index((1,) + (0,) * (n - 2) + (1,))] = 0.5
    return StochMap(region, region, np.tile(col[:, None], (1, region.size)))


def _ab_columns(n, dist_for_ab):
    region = _cells(n)
    mat = np.empty((region.size, region.size))
    for j, word in enumerate(region.words()):
        mat[:, j] = dist_for_ab(word[0] * word[-1])
    return StochMap(region, region, mat)


def gen_nlbox(n):
    """Uniform over the words whose parity equals ``a·b``."""
    n = _check_n(n)
    return _ab_columns(n, lambda ab: _uniform_parity(n, ab))


def nlbox():
    return gen_nlbox(2)


def vk_box(k, n):
    """Parity ``a·b`` with probability ``2**-k``, parity 0 otherwise."""
    k = check_positive_int(k, "k")
    n = _check_n(n)
    w = 0.5 ** k
    even = _uniform_parity(n, 0)
    return _ab_columns(n, lambda ab: w * _uniform_parity(n, ab) + (1 - w) * even)


def vbox(n):
    return vk_box(1, n)


def quiescent_embed(S, width, offset=0):
    """Embed a binary map into ``width`` ternary cells ``0..width-1``.

    Symbol 0 is the quiescent ``q``; binary symbols 0/1 become 1/2. On inputs
    whose window ``offset..offset+m-1`` holds no ``q`` the map acts as ``S``
    on the window and as the identity elsewhere; on every other input it is
    the identity.
    """
    m = len(S.in_region)
    if len(S.out_region) != m or any(d != 2 for d in S.in_region.dims + S.out_region.dims):
        raise ValueError("quiescent_embed needs a binary map with as many outputs as inputs")
    width = check_positive_int(width, "width")
    if offset < 0 or offset + m > width:
        raise ValueError(f"window of {m} cells at offset {offset} overflows width {width}")
    region = Region.uniform(range(width), 3)
    window = slice(offset, offset + m)
    mat = np.zeros((region.size, region.size))
    for j, word in enumerate(region.words()):
        inner = word[window]
        if QUIESCENT in inner:
            mat[j, j] = 1.0
            continue
        col = S.matrix[:, S.in_region.word_index([x - 1 for x in inner])]
        for idx in np.flatnonzero(col):
            out = list(word)
            out[window] = [x + 1 for x in S.out_region.word(idx)]
            mat[region.word_index(out), j] += col[idx]
    return StochMap(region, region, mat)


@dataclass(frozen=True)
class GalleryMap:
    name: GalleryName
    n: int
    k: int
    map: StochMap


CATALOG = {
    GalleryName.PARITY: "parity --n N (N >= 2)",
    GalleryName.MAGIC_COINS: "magiccoins --n N (N >= 2)",
    GalleryName.NLBOX: "nlbox (2 cells)",
    GalleryName.GEN_NLBOX: "gennlbox --n N (N >= 2)",
    GalleryName.VBOX: "vbox --n N (N >= 2)",
    GalleryName.VK_BOX: "vkbox --k K --n N (K >= 1, N >= 2)",
}


def build(name, n=2, k=1):
    name = GalleryName(name)
    if name is GalleryName.PARITY:
        S = parity(n)
    elif name is GalleryName.MAGIC_COINS:
        S = magic_coins(n)
    elif name is GalleryName.NLBOX:
        n, S = 2, nlbox()
    elif name is GalleryName.GEN_NLBOX:
        S = gen_nlbox(n)
    elif name is GalleryName.VBOX:
        S = vbox(n)
    else:
        S = vk_box(k, n)
    return GalleryMap(name, n, k, S)
