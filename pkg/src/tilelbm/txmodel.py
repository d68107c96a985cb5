"""32-byte coalesced-transaction model of the fused gather/store step.

The model replays, for each of the two warps of a tile (lower/upper pair of
z-layers), the set of addresses the warp touches while gathering one
direction, buckets them into aligned 32-byte segments of the source tile's
data block, and counts distinct segments.  No cache is modelled; the counts
are the analytic per-tile figures, with optional per-geometry evaluation that
skips gathers whose source or destination node is solid or whose source tile
is absent.
"""

from dataclasses import dataclass

import numpy as np

from . import lattice, layout
from .geometry import NodeType
from .lattice import TILE_X, TILE_Y, TILE_Z

SEGMENT_BYTES = 32

_PRECISION_BYTES = {"f64": 8, "f32": 4}


def value_bytes(precision):
    try:
        return _PRECISION_BYTES[precision]
    except KeyError:
        raise ValueError(f"unknown precision: {precision!r}") from None


@dataclass
class PerfModel:
    """Bandwidth-bound cost model: per-node byte minima and FLOP/byte."""

    q: int = 19
    n_d: int = 8
    n_t: int = 1
    segment_bytes: int = SEGMENT_BYTES

    def m_node(self):
        return m_node(self.q, self.n_d)

    def b_node(self):
        return b_node(self.q, self.n_d)


def m_node(q=19, n_d=8):
    """Minimum bytes stored per node: q * n_d."""
    if q <= 0 or n_d <= 0:
        raise ValueError(f"q and n_d must be positive: q={q}, n_d={n_d}")
    return q * n_d


def b_node(q=19, n_d=8):
    """Minimum bytes moved per node and iteration: each value is read once
    and stored once, so 2 * q * n_d."""
    return 2 * m_node(q, n_d)


def flop_per_byte(flop_count, bytes_per_node):
    """Arithmetic intensity from a supplied FLOP count (the FLOP counts
    themselves come from kernel disassembly and are inputs here)."""
    if bytes_per_node <= 0:
        raise ValueError(f"bytes per node must be positive: {bytes_per_node}")
    if flop_count < 0:
        raise ValueError(f"FLOP count must be non-negative: {flop_count}")
    return flop_count / bytes_per_node


@dataclass
class TransactionReport:
    precision: str
    table: layout.LayoutTable
    per_direction_reads: dict          # direction name -> segments per tile
    tile_read_total: int               # full-tile gather segments
    tile_read_min: int                 # 19 * 64 * n_d / 32
    read_overhead: float               # tile_read_total / tile_read_min - 1
    # per-geometry totals (None unless evaluated against a tiling)
    t_n: int = None
    write_segments_min: int = None
    write_segments_model: int = None
    nodetype_read_segments: int = None
    read_segments_min: int = None
    read_segments_model: int = None
    total_min: int = None
    total_model: int = None
    tilemap_values_read: int = None
    overhead_vs_min: float = None
    nodetype_bytes_convention: int = 2


def _direction_gather_plan(direction, kind, n_d):
    """Per destination slot: (warp, source tile delta, source segment,
    source canonical slot).  Deltas are (dx, dy, dz) component offsets of the
    source tile relative to the destination tile."""
    slots_per_seg = SEGMENT_BYTES // n_d
    ex, ey, ez = (int(c) for c in lattice.E_VECTORS[direction])
    fn = layout._SCALAR[kind]
    plan = []
    for j in range(64):
        sx, sy, sz = TILE_X[j] - ex, TILE_Y[j] - ey, TILE_Z[j] - ez
        delta = tuple((-1 if c < 0 else 1 if c > 3 else 0) for c in (sx, sy, sz))
        lx, ly, lz = sx & 3, sy & 3, sz & 3
        seg = fn(lx, ly, lz) // slots_per_seg
        canon = lx + 4 * ly + 16 * lz
        warp = int(TILE_Z[j]) >> 1
        plan.append((j, warp, delta, seg, canon))
    return plan


def count_direction_reads(direction, kind, precision):
    """32-byte read segments per tile for one direction's gather, assuming a
    fully fluid tile with fully fluid neighbours.  Distinct (source tile,
    segment) pairs are counted per warp and summed over the two warps."""
    n_d = value_bytes(precision)
    plan = _direction_gather_plan(int(direction), kind, n_d)
    seen = set()
    for _, warp, delta, seg, _ in plan:
        seen.add((warp, delta, seg))
    return len(seen)


def count_tile_overheads(table, precision):
    """Aggregate the per-direction counts of one layout table."""
    n_d = value_bytes(precision)
    per_dir = {}
    for q in range(19):
        kind = layout.layout_for_direction(q, table)
        per_dir[lattice.direction_name(q)] = count_direction_reads(
            q, kind, precision
        )
    total = sum(per_dir.values())
    minimum = 19 * (64 * n_d // SEGMENT_BYTES)
    return TransactionReport(
        precision=precision,
        table=table,
        per_direction_reads=per_dir,
        tile_read_total=total,
        tile_read_min=minimum,
        read_overhead=total / minimum - 1.0,
    )


def _neighbor_indices(grid, deltas):
    """Tile index of each non-empty tile's neighbour for every delta; -1 when
    the neighbour tile is absent or outside the mesh."""
    a = grid.a
    mesh = np.array(grid.mesh_shape)
    coords = grid.non_empty // a
    out = np.empty((grid.t_n, len(deltas)), dtype=np.int64)
    for k, delta in enumerate(deltas):
        nb = coords + np.asarray(delta, dtype=np.int64)
        valid = np.all((nb >= 0) & (nb < mesh), axis=1)
        idx = np.full(grid.t_n, -1, dtype=np.int64)
        if valid.any():
            v = nb[valid]
            idx[valid] = grid.tile_map[v[:, 0], v[:, 1], v[:, 2]]
        out[:, k] = idx
    return out


def _tile_nonsolid_blocks(grid, geometry):
    """(t_n, 64) canonical-order non-solid flags, padding counted as solid."""
    a = grid.a
    nx, ny, nz = geometry.shape
    px, py, pz = grid.padded_dims
    nonsolid = np.zeros((px, py, pz), dtype=bool)
    nonsolid[:nx, :ny, :nz] = geometry.types != NodeType.SOLID
    cx = grid.non_empty[:, 0][:, None] + TILE_X[None, :]
    cy = grid.non_empty[:, 1][:, None] + TILE_Y[None, :]
    cz = grid.non_empty[:, 2][:, None] + TILE_Z[None, :]
    return nonsolid[cx, cy, cz]


def geometry_transaction_totals(grid, geometry, table, precision):
    """Evaluate the transaction model over a concrete tiling.

    Writes and minimal figures follow the full-tile arithmetic
    (t_n * 19 * 64 * n_d / 32 write segments; node-type reads use the 2-byte
    per-node accounting convention even though the store keeps one byte per
    node).  Modelled reads apply the per-direction warp-segment model with
    solid skips: a segment is transferred only if at least one performed
    gather (non-solid destination, non-solid source, existing source tile)
    touches it.
    """
    if grid.a != 4:
        raise ValueError("transaction model is defined for 4^3-node tiles")
    n_d = value_bytes(precision)
    segs_per_block = 64 * n_d // SEGMENT_BYTES
    t_n = grid.t_n

    tile_report = count_tile_overheads(table, precision)

    dest_ns = _tile_nonsolid_blocks(grid, geometry)

    # collect all deltas used by any direction
    plans = {}
    deltas = []
    delta_id = {}
    for q in range(19):
        kind = layout.layout_for_direction(q, table)
        plan = _direction_gather_plan(q, kind, n_d)
        plans[q] = plan
        for _, _, delta, _, _ in plan:
            if delta not in delta_id:
                delta_id[delta] = len(deltas)
                deltas.append(delta)
    nbr = _neighbor_indices(grid, deltas)

    read_model = 0
    for q in range(19):
        groups = {}
        for j, warp, delta, seg, canon in plans[q]:
            groups.setdefault((warp, delta, seg), []).append((j, canon))
        for (warp, delta, seg), members in groups.items():
            nb = nbr[:, delta_id[delta]]
            ok = nb >= 0
            nb_safe = np.where(ok, nb, 0)
            dst = np.array([j for j, _ in members])
            src = np.array([c for _, c in members])
            src_ns = dest_ns[nb_safe[:, None], src[None, :]]
            active = (dest_ns[:, dst] & src_ns).any(axis=1)
            read_model += int(np.count_nonzero(active & ok))

    # writes: a store segment is touched when it holds >= 1 non-solid lane
    write_model = 0
    perms = layout.table_permutations(table)
    for q in range(19):
        seg_of_slot = perms[q] // (SEGMENT_BYTES // n_d)
        for seg in range(segs_per_block):
            members = np.flatnonzero(seg_of_slot == seg)
            write_model += int(np.count_nonzero(dest_ns[:, members].any(axis=1)))

    write_min = t_n * 19 * segs_per_block
    nodetype_segments = t_n * (64 * 2 // SEGMENT_BYTES)   # 2-byte convention
    read_min = write_min + nodetype_segments
    read_total_model = read_model + nodetype_segments
    total_min = write_min + read_min
    total_model = write_model + read_total_model

    tile_report.t_n = t_n
    tile_report.write_segments_min = write_min
    tile_report.write_segments_model = write_model
    tile_report.nodetype_read_segments = nodetype_segments
    tile_report.read_segments_min = read_min
    tile_report.read_segments_model = read_total_model
    tile_report.total_min = total_min
    tile_report.total_model = total_model
    tile_report.tilemap_values_read = 27 * t_n
    tile_report.overhead_vs_min = total_model / total_min - 1.0
    return tile_report
