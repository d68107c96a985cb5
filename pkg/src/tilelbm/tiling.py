"""Uniform tile mesh over a voxel geometry and its utilization analytics.

The geometry is covered by a mesh of cubic a^3-node tiles anchored at node
(0, 0, 0); dimensions that are not multiples of a are padded with solid
nodes.  Tiles made of solid nodes only are dropped.  Two structures describe
the result: ``non_empty`` lists the corner coordinates of the kept tiles in
scan order (z outermost, then y, x innermost), and ``tile_map`` is the dense
3D array of indices into that list, holding -1 for all-solid tiles.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import Geometry, NodeType, generate_channel


@dataclass
class TileGrid:
    a: int
    dims: tuple                 # original geometry node counts
    padded_dims: tuple          # rounded up to multiples of a
    tile_map: np.ndarray        # (ntx, nty, ntz) int32, -1 for empty tiles
    non_empty: np.ndarray       # (t_n, 3) int32 tile corner coordinates

    @property
    def t_n(self):
        return int(self.non_empty.shape[0])

    @property
    def nodes_per_tile(self):
        return self.a ** 3

    @property
    def mesh_shape(self):
        return self.tile_map.shape


@dataclass
class TileStats:
    t_n: int                    # non-empty tile count
    n_fn: int                   # non-solid node count
    eta_t: float                # average tile utilization
    n_tfn: float                # average non-solid nodes per tile
    n_tsn: float                # average solid nodes per tile
    eta_f: float                # common faces per tile
    eta_e: float                # common edges per tile


def build_tiling(geometry, a=4):
    """Cover a geometry with a^3-node tiles and drop the all-solid ones.

    Tiles are scanned with the z corner coordinate outermost and x innermost;
    a tile is appended to the non-empty list as soon as it shows one non-solid
    node.  Linear in the node count.
    """
    a = int(a)
    if a < 1:
        raise ValueError(f"tile edge must be >= 1, got {a}")
    nx, ny, nz = geometry.shape
    ntx, nty, ntz = (-(-n // a) for n in (nx, ny, nz))
    px, py, pz = ntx * a, nty * a, ntz * a

    nonsolid = np.zeros((px, py, pz), dtype=bool)
    nonsolid[:nx, :ny, :nz] = geometry.types != NodeType.SOLID
    occupied = nonsolid.reshape(ntx, a, nty, a, ntz, a).any(axis=(1, 3, 5))

    tile_map = np.full((ntx, nty, ntz), -1, dtype=np.int32)
    # scan order: z outer, y middle, x inner
    scan = occupied.transpose(2, 1, 0).ravel()
    order = np.flatnonzero(scan)
    tz, ty, tx = np.unravel_index(order, (ntz, nty, ntx))
    tile_map[tx, ty, tz] = np.arange(order.size, dtype=np.int32)
    non_empty = np.stack([tx * a, ty * a, tz * a], axis=1).astype(np.int32)

    return TileGrid(
        a=a,
        dims=(nx, ny, nz),
        padded_dims=(px, py, pz),
        tile_map=tile_map,
        non_empty=non_empty,
    )


def faces_edges_per_tile(grid):
    """Average count of common faces and common edges per non-empty tile.

    A common face is shared by a pair of face-adjacent non-empty tiles; a
    common edge is a tile-mesh edge whose four surrounding tiles (the 2x2
    arrangement in the plane perpendicular to the edge) are all non-empty.
    Four tiles in a 2x2x1 mesh give eta_f = 1 and eta_e = 1/4.
    """
    occ = grid.tile_map >= 0
    t_n = grid.t_n
    if t_n == 0:
        raise ValueError("tile grid has no non-empty tiles")
    faces = 0
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        faces += int(np.count_nonzero(occ[tuple(lo)] & occ[tuple(hi)]))
    edges = 0
    for a1, a2 in ((0, 1), (0, 2), (1, 2)):
        sl = [slice(None)] * 3
        sl[a1] = slice(None, -1)
        sl[a2] = slice(None, -1)
        quad = occ[tuple(sl)].copy()
        for d1, d2 in ((1, 0), (0, 1), (1, 1)):
            sl = [slice(None)] * 3
            sl[a1] = slice(d1, occ.shape[a1] - 1 + d1)
            sl[a2] = slice(d2, occ.shape[a2] - 1 + d2)
            quad &= occ[tuple(sl)]
        edges += int(np.count_nonzero(quad))
    return faces / t_n, edges / t_n


def tile_utilization(grid, geometry):
    """Exact utilization statistics of a tiling by full enumeration."""
    n_fn = geometry.nonsolid_count()
    t_n = grid.t_n
    if t_n == 0:
        raise ValueError("geometry contains no non-solid nodes")
    n_tn = grid.nodes_per_tile
    eta_t = n_fn / (t_n * n_tn)
    n_tfn = n_fn / t_n
    eta_f, eta_e = faces_edges_per_tile(grid)
    return TileStats(
        t_n=t_n,
        n_fn=n_fn,
        eta_t=eta_t,
        n_tfn=n_tfn,
        n_tsn=n_tn - n_tfn,
        eta_f=eta_f,
        eta_e=eta_e,
    )


def per_tile_nonsolid_counts(grid, geometry):
    """Non-solid node count of every non-empty tile, in tile index order."""
    a = grid.a
    px, py, pz = grid.padded_dims
    nx, ny, nz = geometry.shape
    nonsolid = np.zeros((px, py, pz), dtype=bool)
    nonsolid[:nx, :ny, :nz] = geometry.types != NodeType.SOLID
    counts = nonsolid.reshape(px // a, a, py // a, a, pz // a, a).sum(
        axis=(1, 3, 5)
    )
    tx, ty, tz = (grid.non_empty[:, i] // a for i in range(3))
    return counts[tx, ty, tz]


def overhead_generic(eta_t):
    """Generic tiling overhead (1 - eta_t) / eta_t."""
    if not 0.0 < eta_t <= 1.0:
        raise ValueError(f"tile utilization must be in (0, 1]: {eta_t}")
    return (1.0 - eta_t) / eta_t


def overhead_memory(eta_t, q=19, n_d=8, n_t=1):
    """Memory overhead against the q*n_d bytes-per-node minimum.

    Accounts for the second value copy and the n_t node-type bytes:
    (2*q*n_d + n_t) / (eta_t*q*n_d) - 1.  Returns (exact, approximation)
    where the approximation (2 - eta_t)/eta_t holds for n_t << q*n_d.
    """
    if not 0.0 < eta_t <= 1.0:
        raise ValueError(f"tile utilization must be in (0, 1]: {eta_t}")
    if q <= 0 or n_d <= 0 or n_t < 0:
        raise ValueError("q and n_d must be positive, n_t non-negative")
    exact = (2.0 * q * n_d + n_t) / (eta_t * q * n_d) - 1.0
    approx = (2.0 - eta_t) / eta_t
    return exact, approx


def channel_tiling_sweep(shape, d, axis=0, a=4):
    """Tile utilization of all 16 transverse placements of a channel.

    Builds one 4-node-long slab per offset pair (the cross-section repeats
    along the axis, so a single tile slab has the utilization of the infinite
    channel).  Returns (list of ((off1, off2), eta_t as Fraction), mean).
    """
    results = []
    for off1 in range(a):
        for off2 in range(a):
            g = generate_channel(shape, d, axis=axis, offsets=(off1, off2),
                                 length=a)
            grid = build_tiling(g, a)
            eta = Fraction(g.nonsolid_count(), grid.t_n * grid.nodes_per_tile)
            results.append(((off1, off2), eta))
    mean = sum(eta for _, eta in results) / len(results)
    return results, mean


def bu_propagation_estimate(eta_f, eta_e):
    """Empirical bandwidth-utilization fit of the gather step.

    0.92 - eta_f/14.28 - eta_e/25.74 + 0.00104/(2.9 - eta_f)
         + 0.0023/(2.81 - eta_e)

    Fitted on one specific GPU; reported for comparison only.  The poles at
    eta_f = 2.9 and eta_e = 2.81 are rejected.
    """
    if eta_f == 2.9:
        raise ValueError("eta_f = 2.9 is a singularity of the fit")
    if eta_e == 2.81:
        raise ValueError("eta_e = 2.81 is a singularity of the fit")
    return (
        0.92
        - eta_f / 14.28
        - eta_e / 25.74
        + 0.00104 / (2.9 - eta_f)
        + 0.0023 / (2.81 - eta_e)
    )


def edge_face_plane_residual(eta_f, eta_e):
    """Residual of the coarse edge/face relation eta_e = 1.85*eta_f - 2.56."""
    return eta_e - (1.85 * eta_f - 2.56)
