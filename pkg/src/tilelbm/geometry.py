"""Dense voxel geometry: node types, generators for the test cases, TLBM1 I/O.

A geometry is a dense nx*ny*nz grid of single-byte node type tags plus two
uniform boundary parameters (inlet velocity triple, outlet density).  Node
(x, y, z) is addressed as ``types[x, y, z]``; on disk the tags are stored with
x running fastest.
"""

import enum
import io
import json
from dataclasses import dataclass, field

import numpy as np


class NodeType(enum.IntEnum):
    SOLID = 0
    FLUID = 1
    BB_WALL = 2
    VELOCITY_INLET = 3
    PRESSURE_OUTLET = 4


_VALID_TAGS = frozenset(int(t) for t in NodeType)

VOXEL_MAGIC = b"TLBM1"


class VoxelFormatError(ValueError):
    """Raised for malformed TLBM1 voxel streams."""


@dataclass
class Geometry:
    """Voxel grid of node types with uniform boundary parameters."""

    types: np.ndarray                      # (nx, ny, nz) uint8
    inlet_velocity: tuple = (0.0, 0.0, 0.0)
    outlet_density: float = 1.0

    def __post_init__(self):
        self.types = np.ascontiguousarray(self.types, dtype=np.uint8)
        if self.types.ndim != 3:
            raise ValueError("types array must be 3-dimensional")
        self.inlet_velocity = tuple(float(c) for c in self.inlet_velocity)
        if len(self.inlet_velocity) != 3:
            raise ValueError("inlet velocity must be a 3-component vector")
        self.outlet_density = float(self.outlet_density)

    @property
    def shape(self):
        return self.types.shape

    @property
    def node_count(self):
        return int(self.types.size)

    def nonsolid_mask(self):
        return self.types != NodeType.SOLID

    def nonsolid_count(self):
        return int(np.count_nonzero(self.types != NodeType.SOLID))

    def porosity(self):
        """Non-solid node count over the full bounding-box node count."""
        return self.nonsolid_count() / self.node_count

    def __eq__(self, other):
        if not isinstance(other, Geometry):
            return NotImplemented
        return (
            self.types.shape == other.types.shape
            and np.array_equal(self.types, other.types)
            and self.inlet_velocity == other.inlet_velocity
            and self.outlet_density == other.outlet_density
        )


def generate_cavity3d(b, lid_velocity=(0.05, 0.0, 0.0)):
    """Cubic lid-driven cavity: fluid interior, five bounce-back walls and a
    tangentially moving lid on the top (+z) face.

    There are no solid nodes, so the porosity is exactly 1.  Nodes on the rim
    of the lid belong to the side walls (bounce-back wins at edges).
    """
    b = int(b)
    if b < 4:
        raise ValueError(f"cavity edge must be at least 4 nodes, got {b}")
    t = np.full((b, b, b), NodeType.FLUID, dtype=np.uint8)
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = 0
        hi[axis] = b - 1
        t[tuple(lo)] = NodeType.BB_WALL
        t[tuple(hi)] = NodeType.BB_WALL
    t[1:-1, 1:-1, b - 1] = NodeType.VELOCITY_INLET
    return Geometry(t, inlet_velocity=lid_velocity)


def _channel_cross_masks(shape, d, n1, n2, off1, off2):
    """Non-solid and interior masks of one channel cross-section.

    For circular channels a node belongs to the channel when its unit cell
    centre lies strictly inside the disc of diameter d+1 concentric with the
    channel, i.e. (2*(u - off) - (d-1))^2 summed over both transverse axes
    < (d+1)^2.  This integer criterion spans exactly d nodes along each axis
    and reproduces the discrete set of achievable tile utilizations (four
    distinct values for d = 8).
    """
    u1, u2 = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    if shape == "square":
        inside = (
            (u1 >= off1) & (u1 <= off1 + d - 1)
            & (u2 >= off2) & (u2 <= off2 + d - 1)
        )
    elif shape == "circle":
        inside = (
            (2 * (u1 - off1) - (d - 1)) ** 2
            + (2 * (u2 - off2) - (d - 1)) ** 2
        ) < (d + 1) ** 2
    else:
        raise ValueError(f"unknown channel shape: {shape!r}")
    # interior = nodes whose 4 transverse neighbours are all inside
    pad = np.zeros((n1 + 2, n2 + 2), dtype=bool)
    pad[1:-1, 1:-1] = inside
    interior = (
        pad[1:-1, 1:-1]
        & pad[:-2, 1:-1] & pad[2:, 1:-1]
        & pad[1:-1, :-2] & pad[1:-1, 2:]
    )
    return inside, interior


def generate_channel(shape, d, axis=0, offsets=(0, 0), length=16, ends="wall",
                     inlet_velocity=(0.0, 0.0, 0.0), outlet_density=1.0):
    """Straight channel of square or circular cross-section embedded in solid.

    The cross-section (walls included) spans d nodes per transverse axis,
    shifted by ``offsets`` (0..3 each) against the 4-aligned tile mesh.  The
    outermost non-solid layer is a bounce-back wall, the rest is fluid.

    ends: "wall" seals both channel ends with bounce-back; "io" types the
    fluid cross-section of the low end face as a velocity inlet and of the
    high end face as a pressure outlet (the wall ring stays bounce-back).
    """
    d = int(d)
    if d < 1:
        raise ValueError(f"channel cross-section must be >= 1 node, got {d}")
    off1, off2 = (int(o) for o in offsets)
    if not (0 <= off1 <= 3 and 0 <= off2 <= 3):
        raise ValueError(f"offsets must be in 0..3, got {offsets}")
    length = int(length)
    if length < 1:
        raise ValueError(f"channel length must be >= 1, got {length}")
    axis = int(axis)
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2, got {axis}")

    n1, n2 = off1 + d, off2 + d
    inside, interior = _channel_cross_masks("square" if shape == "square" else shape,
                                            d, n1, n2, off1, off2)
    if not inside.any():
        raise ValueError("channel cross-section is empty")

    cross = np.where(interior, NodeType.FLUID, np.uint8(NodeType.BB_WALL))
    cross = np.where(inside, cross, np.uint8(NodeType.SOLID)).astype(np.uint8)

    # broadcast the cross-section along the channel axis
    dims = [0, 0, 0]
    trans = [a for a in range(3) if a != axis]
    dims[axis] = length
    dims[trans[0]], dims[trans[1]] = n1, n2
    t = np.empty(tuple(dims), dtype=np.uint8)
    np.moveaxis(t, axis, 2)[:, :, :] = cross[:, :, np.newaxis]

    # end faces
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[axis] = 0
    hi[axis] = length - 1
    if ends == "wall":
        end_lo = t[tuple(lo)]
        end_lo[end_lo != NodeType.SOLID] = NodeType.BB_WALL
        end_hi = t[tuple(hi)]
        end_hi[end_hi != NodeType.SOLID] = NodeType.BB_WALL
    elif ends == "io":
        end_lo = t[tuple(lo)]
        end_lo[end_lo == NodeType.FLUID] = NodeType.VELOCITY_INLET
        end_hi = t[tuple(hi)]
        end_hi[end_hi == NodeType.FLUID] = NodeType.PRESSURE_OUTLET
    else:
        raise ValueError(f"unknown ends mode: {ends!r}")

    return Geometry(t, inlet_velocity=inlet_velocity,
                    outlet_density=outlet_density)


def generate_sphere_pack(n, diameter, target_porosity, seed, flow_axis=2,
                         inlet_velocity=(0.0, 0.0, 0.0), outlet_density=1.0,
                         max_passes=20):
    """Randomly arranged solid spheres in an n^3 box at a target porosity.

    Sphere centres are drawn uniformly inside the box (overlap permitted) and
    added one by one until the measured porosity falls within +/- 0.005 of the
    target.  A pass that overshoots below the band is abandoned and retried
    with fresh centres; after ``max_passes`` failed passes the porosity is
    reported as unreachable.

    The two box faces perpendicular to ``flow_axis`` are typed inlet/outlet on
    their non-solid nodes, the remaining four faces become bounce-back walls
    (walls win on shared edges).
    """
    n = int(n)
    if n < 4:
        raise ValueError(f"box edge must be at least 4 nodes, got {n}")
    if not 0.0 < target_porosity < 1.0:
        raise ValueError(f"target porosity must be in (0, 1): {target_porosity}")
    r = float(diameter) / 2.0
    band = 0.005
    rng = np.random.default_rng(seed)
    centers_x = np.arange(n) + 0.5

    solid = None
    for _ in range(int(max_passes)):
        solid = np.zeros((n, n, n), dtype=bool)
        while True:
            porosity = 1.0 - solid.mean()
            if porosity <= target_porosity + band:
                break
            c = rng.uniform(0.0, n, size=3)
            d0 = (centers_x - c[0]) ** 2
            d1 = (centers_x - c[1]) ** 2
            d2 = (centers_x - c[2]) ** 2
            solid |= (
                d0[:, None, None] + d1[None, :, None] + d2[None, None, :]
                <= r * r
            )
        if porosity >= target_porosity - band:
            break
    else:
        raise ValueError(
            f"target porosity {target_porosity} unreachable within "
            f"+/-{band} after {max_passes} packing passes"
        )

    t = np.where(solid, np.uint8(NodeType.SOLID),
                 np.uint8(NodeType.FLUID)).astype(np.uint8)

    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[flow_axis] = 0
    hi[flow_axis] = n - 1
    face = t[tuple(lo)]
    face[face == NodeType.FLUID] = NodeType.VELOCITY_INLET
    face = t[tuple(hi)]
    face[face == NodeType.FLUID] = NodeType.PRESSURE_OUTLET
    for axis in range(3):
        if axis == flow_axis:
            continue
        for idx in (0, n - 1):
            sl = [slice(None)] * 3
            sl[axis] = idx
            wall = t[tuple(sl)]
            wall[wall != NodeType.SOLID] = NodeType.BB_WALL

    return Geometry(t, inlet_velocity=inlet_velocity,
                    outlet_density=outlet_density)


_DEFAULT_PARAMS = {"inlet_velocity": [0.0, 0.0, 0.0], "outlet_density": 1.0}


def save_voxels(geometry, stream):
    """Write a geometry as a TLBM1 stream.

    Format: magic "TLBM1", newline, ASCII header "nx ny nz", newline, then
    nx*ny*nz raw tag bytes with x running fastest, then a JSON parameter
    object (inlet velocity, outlet density).
    """
    nx, ny, nz = geometry.shape
    stream.write(VOXEL_MAGIC + b"\n")
    stream.write(f"{nx} {ny} {nz}\n".encode("ascii"))
    stream.write(geometry.types.tobytes(order="F"))
    params = {
        "inlet_velocity": list(geometry.inlet_velocity),
        "outlet_density": geometry.outlet_density,
    }
    stream.write(json.dumps(params, sort_keys=True).encode("ascii"))


def load_voxels(stream):
    """Read a TLBM1 stream back into a Geometry.

    Raises VoxelFormatError for a bad magic, malformed header, truncated
    payload or unknown tag byte; no partial geometry is ever returned.
    """
    magic = stream.readline().rstrip(b"\n")
    if magic != VOXEL_MAGIC:
        raise VoxelFormatError(f"bad magic: {magic!r}")
    header = stream.readline()
    try:
        nx, ny, nz = (int(v) for v in header.split())
    except ValueError:
        raise VoxelFormatError(f"malformed header line: {header!r}") from None
    if min(nx, ny, nz) < 1:
        raise VoxelFormatError(f"non-positive dimensions: {nx} {ny} {nz}")
    count = nx * ny * nz
    payload = stream.read(count)
    if len(payload) != count:
        raise VoxelFormatError(
            f"truncated payload: expected {count} bytes, got {len(payload)}"
        )
    tags = np.frombuffer(payload, dtype=np.uint8)
    bad = set(np.unique(tags)) - _VALID_TAGS
    if bad:
        raise VoxelFormatError(f"unknown node type tags: {sorted(bad)}")
    types = tags.reshape((nx, ny, nz), order="F")

    params = dict(_DEFAULT_PARAMS)
    rest = stream.read()
    if rest:
        try:
            params.update(json.loads(rest))
        except json.JSONDecodeError as exc:
            raise VoxelFormatError(f"malformed parameter table: {exc}") from None
    return Geometry(
        types.copy(),
        inlet_velocity=tuple(params["inlet_velocity"]),
        outlet_density=params["outlet_density"],
    )


def save_voxels_path(geometry, path):
    with open(path, "wb") as f:
        save_voxels(geometry, f)


def load_voxels_path(path):
    with open(path, "rb") as f:
        return load_voxels(f)
