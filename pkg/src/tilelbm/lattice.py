"""D3Q19 lattice constants: direction vectors, weights, opposites, thread mapping.

Direction index order is fixed once here and used everywhere else.  Index 0 is
the rest direction, indices 1..6 are the axis directions and 7..18 the twelve
planar diagonals:

    idx  name  vector        idx  name  vector        idx  name  vector
    0    O     ( 0, 0, 0)    7    NE    ( 1, 1, 0)    13   ST    ( 0,-1, 1)
    1    E     ( 1, 0, 0)    8    NW    (-1, 1, 0)    14   SB    ( 0,-1,-1)
    2    N     ( 0, 1, 0)    9    SE    ( 1,-1, 0)    15   ET    ( 1, 0, 1)
    3    W     (-1, 0, 0)    10   SW    (-1,-1, 0)    16   EB    ( 1, 0,-1)
    4    S     ( 0,-1, 0)    11   NT    ( 0, 1, 1)    17   WT    (-1, 0, 1)
    5    T     ( 0, 0, 1)    12   NB    ( 0, 1,-1)    18   WB    (-1, 0,-1)

E/W point along +/-x, N/S along +/-y, T/B along +/-z.  W = index 3 = (-1,0,0).
"""

from fractions import Fraction

import numpy as np

Q = 19

DIRECTION_NAMES = (
    "O",
    "E", "N", "W", "S", "T", "B",
    "NE", "NW", "SE", "SW",
    "NT", "NB", "ST", "SB",
    "ET", "EB", "WT", "WB",
)

E_VECTORS = np.array(
    [
        (0, 0, 0),
        (1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
        (1, 1, 0), (-1, 1, 0), (1, -1, 0), (-1, -1, 0),
        (0, 1, 1), (0, 1, -1), (0, -1, 1), (0, -1, -1),
        (1, 0, 1), (1, 0, -1), (-1, 0, 1), (-1, 0, -1),
    ],
    dtype=np.int64,
)

INDEX_BY_NAME = {name: i for i, name in enumerate(DIRECTION_NAMES)}

# weights: 1/3 rest, 1/18 axis, 1/36 diagonal
WEIGHTS_EXACT = tuple(
    Fraction(1, 3) if i == 0 else Fraction(1, 18) if i <= 6 else Fraction(1, 36)
    for i in range(Q)
)
WEIGHTS = np.array([float(w) for w in WEIGHTS_EXACT])

CS2 = 1.0 / 3.0            # lattice speed of sound squared
DELTA_X = 1.0
DELTA_T = 1.0

OPPOSITE = np.array(
    [0, 3, 4, 1, 2, 6, 5, 10, 9, 8, 7, 14, 13, 12, 11, 18, 17, 16, 15],
    dtype=np.int64,
)

AXIS_DIRECTIONS = tuple(range(1, 7))
DIAGONAL_DIRECTIONS = tuple(range(7, 19))


def _check_index(i):
    if not 0 <= int(i) <= 18:
        raise ValueError(f"direction index out of range 0..18: {i}")
    return int(i)


def direction_vector(i):
    """Unit direction vector e_i as an integer 3-tuple."""
    return tuple(int(c) for c in E_VECTORS[_check_index(i)])


def direction_name(i):
    return DIRECTION_NAMES[_check_index(i)]


def direction_index(name):
    try:
        return INDEX_BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown direction name: {name!r}") from None


def weight(i):
    """Lattice weight of direction i as an exact Fraction."""
    return WEIGHTS_EXACT[_check_index(i)]


def opposite(i):
    """Index of the direction with the negated vector."""
    return int(OPPOSITE[_check_index(i)])


def thread_linear_index(tx, ty, tz):
    """Linear thread/node index inside a 4^3 tile: tx + 4*ty + 16*tz.

    The first warp (indices 0..31) covers nodes with tz in {0, 1}, the second
    warp (32..63) covers tz in {2, 3}.
    """
    for c in (tx, ty, tz):
        if not 0 <= int(c) <= 3:
            raise ValueError(f"intra-tile coordinate out of range 0..3: {c}")
    return int(tx) + 4 * int(ty) + 16 * int(tz)


def node_coords(j):
    """Inverse of thread_linear_index: (tx, ty, tz) for slot j in 0..63."""
    j = int(j)
    if not 0 <= j <= 63:
        raise ValueError(f"tile slot out of range 0..63: {j}")
    return j & 3, (j >> 2) & 3, (j >> 4) & 3


# canonical intra-tile coordinates in thread order, used by layout and solver
TILE_X = np.arange(64) & 3
TILE_Y = (np.arange(64) >> 2) & 3
TILE_Z = (np.arange(64) >> 4) & 3
