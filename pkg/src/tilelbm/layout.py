"""Intra-tile data-block addressing.

Every (tile, direction, copy) triple owns one contiguous 64-slot data block.
The position of a node's value inside the block is given by one of three
bijective mappings of the intra-tile coordinates (x, y, z in 0..3):

    L_XYZ      = x + 4y + 16z
    L_YXZ      = y + 4x + 16z
    L_zigzagNE = 2*(x + 3y + ((x+1) & 4)*(3-y)) + (z & 1) + 16*(z & 2)

The zigzag mapping stores the two z-neighbours of an (x, y) column in adjacent
slots, which keeps diagonal north-east gathers inside few 32-byte segments.

Which mapping serves which direction is a per-direction assignment; the
optimised table uses XYZ for directions with zero x-component, zigzagNE for
NE/SE and YXZ for the rest.  A plain all-XYZ table is available as well and is
the default for single precision, where the optimised placement pays off less.
"""

import enum

import numpy as np

from . import lattice
from .lattice import TILE_X, TILE_Y, TILE_Z


class LayoutKind(enum.Enum):
    XYZ = "xyz"
    YXZ = "yxz"
    ZIGZAG_NE = "zigzag_ne"


class LayoutTable(enum.Enum):
    OPTIMIZED = "optimized"
    XYZ = "xyz"


def _check_coords(x, y, z):
    for c in (x, y, z):
        if not 0 <= int(c) <= 3:
            raise ValueError(f"intra-tile coordinate out of range 0..3: {c}")


def l_xyz(x, y, z):
    _check_coords(x, y, z)
    return int(x) + 4 * int(y) + 16 * int(z)


def l_yxz(x, y, z):
    _check_coords(x, y, z)
    return int(y) + 4 * int(x) + 16 * int(z)


def l_zigzag_ne(x, y, z):
    _check_coords(x, y, z)
    x, y, z = int(x), int(y), int(z)
    return 2 * (x + 3 * y + ((x + 1) & 4) * (3 - y)) + (z & 1) + 16 * (z & 2)


_SCALAR = {
    LayoutKind.XYZ: l_xyz,
    LayoutKind.YXZ: l_yxz,
    LayoutKind.ZIGZAG_NE: l_zigzag_ne,
}


def offsets(kind):
    """Block offsets for all 64 canonical slots (thread order) as an array."""
    f = _SCALAR[kind]
    return np.array([f(x, y, z) for x, y, z in zip(TILE_X, TILE_Y, TILE_Z)])


# optimised per-direction assignment: XYZ for zero-x directions, zigzagNE for
# NE and SE, YXZ for everything else with a nonzero x-component
_XYZ_DIRS = ("O", "N", "S", "T", "B", "NT", "NB", "ST", "SB")
_ZIGZAG_DIRS = ("NE", "SE")
_YXZ_DIRS = ("E", "W", "ET", "EB", "NW", "SW", "WT", "WB")

_OPTIMIZED = {}
for _n in _XYZ_DIRS:
    _OPTIMIZED[lattice.direction_index(_n)] = LayoutKind.XYZ
for _n in _YXZ_DIRS:
    _OPTIMIZED[lattice.direction_index(_n)] = LayoutKind.YXZ
for _n in _ZIGZAG_DIRS:
    _OPTIMIZED[lattice.direction_index(_n)] = LayoutKind.ZIGZAG_NE


def layout_for_direction(direction, table=LayoutTable.OPTIMIZED):
    """Mapping kind used for the data blocks of one direction."""
    direction = int(direction)
    if not 0 <= direction <= 18:
        raise ValueError(f"direction index out of range 0..18: {direction}")
    if table is LayoutTable.XYZ:
        return LayoutKind.XYZ
    return _OPTIMIZED[direction]


def default_table(precision):
    """Precision-appropriate default: optimised for f64, plain XYZ for f32."""
    if precision == "f64":
        return LayoutTable.OPTIMIZED
    if precision == "f32":
        return LayoutTable.XYZ
    raise ValueError(f"unknown precision: {precision!r}")


def table_permutations(table):
    """(19, 64) array: canonical slot -> block offset for every direction."""
    return np.stack(
        [offsets(layout_for_direction(q, table)) for q in range(19)]
    )


def value_address(tile_index, direction, copy, x, y, z, *, t_n,
                  table=LayoutTable.OPTIMIZED):
    """Global slot index of one value in the flat two-copy value array.

    Blocks are laid out copy-major, then tile, then direction:
    block base = ((copy * t_n + tile_index) * 19 + direction) * 64.
    """
    tile_index = int(tile_index)
    if not 0 <= tile_index < t_n:
        raise ValueError(f"tile index out of range 0..{t_n - 1}: {tile_index}")
    direction = int(direction)
    if not 0 <= direction <= 18:
        raise ValueError(f"direction index out of range 0..18: {direction}")
    if int(copy) not in (0, 1):
        raise ValueError(f"copy flag must be 0 or 1: {copy}")
    kind = layout_for_direction(direction, table)
    base = ((int(copy) * t_n + tile_index) * 19 + direction) * 64
    return base + _SCALAR[kind](x, y, z)


class FieldStore:
    """Two complete copies of all f_i values in per-tile 64-slot data blocks.

    The backing array is one flat, contiguous buffer addressed by
    ``value_address``.  ``blocks(copy)`` exposes it as (t_n, 19, 64).
    """

    def __init__(self, t_n, table=LayoutTable.OPTIMIZED, dtype=np.float64):
        self.t_n = int(t_n)
        self.table = table
        self.dtype = np.dtype(dtype)
        self.flat = np.zeros(2 * self.t_n * 19 * 64, dtype=self.dtype)
        self.perms = table_permutations(table)

    def blocks(self, copy):
        if int(copy) not in (0, 1):
            raise ValueError(f"copy flag must be 0 or 1: {copy}")
        view = self.flat.reshape(2, self.t_n, 19, 64)
        return view[int(copy)]

    def fill_canonical(self, copy, values):
        """Scatter (19, t_n, 64) canonical-slot values into one copy."""
        blocks = self.blocks(copy)
        for q in range(19):
            blocks[:, q, self.perms[q]] = values[q]

    def read_canonical(self, copy):
        """Gather one copy back to (19, t_n, 64) canonical slot order."""
        blocks = self.blocks(copy)
        out = np.empty((19, self.t_n, 64), dtype=self.dtype)
        for q in range(19):
            out[q] = blocks[:, q, :][:, self.perms[q]]
        return out
