"""Boundary handling: wall reflection and Zou-He face closures.

Walls come in two flavours.  Missing gathers (source node solid, source tile
absent, or off-domain) are replaced at any non-solid node by the node's own
stored value of the opposite direction, which is the halfway link bounce-back
rule.  Nodes typed as bounce-back walls additionally replace their collision
with a full reflection of the gathered populations, pinning zero velocity at
the wall-node layer.

Velocity inlets and pressure outlets use the Zou-He closure on axis-aligned
domain faces.  With inward unit normal n, the populations with c.n > 0 are
unknown after streaming.  Writing j for the momentum density (rho*u for the
quasi-compressible model, u for the incompressible one), K0 for the sum of
known populations with c.n = 0 and Km for those with c.n < 0:

    rho (1 - u.n) = K0 + 2 Km            (solved for rho at inlets,
                                          for u.n at outlets)
    f_t = f_t~ + j_n / 3                 (axis direction t = n)
    f_d = f_d~ + (j_n + s j_tau)/6 - s N_tau

for every unknown diagonal d with transverse axis tau and sign s, where

    N_tau = (sum of c.n = 0 populations with c_tau = +1
             - sum with c_tau = -1) / 2 - j_tau / 3.

After the closure the node's moments equal the prescribed values exactly and
the node collides like any fluid node.
"""

from dataclasses import dataclass

import numpy as np

from .collision import FluidModel
from .geometry import NodeType
from .lattice import E_VECTORS, OPPOSITE


@dataclass
class FaceClosure:
    """Precomputed index sets of one axis-aligned face's Zou-He closure."""

    axis: int
    inward_sign: int            # +1 at the low face, -1 at the high face
    unknown_axis: int           # direction with c = n
    unknown_axis_opp: int
    diagonals: tuple            # (dir, opposite dir, tau axis, sigma)
    k0: tuple                   # c.n = 0 directions
    km: tuple                   # c.n = -1 directions
    tangential: dict            # tau axis -> (plus dirs, minus dirs) with c.n = 0


def face_closure(axis, inward_sign):
    axis = int(axis)
    inward_sign = int(inward_sign)
    n = np.zeros(3, dtype=np.int64)
    n[axis] = inward_sign
    cn = E_VECTORS @ n
    unknown = [q for q in range(19) if cn[q] == 1]
    k0 = tuple(q for q in range(19) if cn[q] == 0)
    km = tuple(q for q in range(19) if cn[q] == -1)
    axis_dir = None
    diagonals = []
    for q in unknown:
        others = [a for a in range(3) if a != axis and E_VECTORS[q, a] != 0]
        if not others:
            axis_dir = q
        else:
            tau = others[0]
            diagonals.append((q, int(OPPOSITE[q]), tau, int(E_VECTORS[q, tau])))
    tangential = {}
    for tau in (a for a in range(3) if a != axis):
        plus = tuple(q for q in k0 if E_VECTORS[q, tau] == 1)
        minus = tuple(q for q in k0 if E_VECTORS[q, tau] == -1)
        tangential[tau] = (plus, minus)
    return FaceClosure(
        axis=axis,
        inward_sign=inward_sign,
        unknown_axis=axis_dir,
        unknown_axis_opp=int(OPPOSITE[axis_dir]),
        diagonals=tuple(diagonals),
        k0=k0,
        km=km,
        tangential=tangential,
    )


FACE_CLOSURES = {
    (axis, sign): face_closure(axis, sign)
    for axis in range(3)
    for sign in (1, -1)
}


def classify_boundary_faces(geometry):
    """Assign every inlet/outlet node to the domain face it sits on.

    Returns {(axis, inward_sign): (inlet_ids, outlet_ids)} with flat C-order
    node indices.  A node typed inlet or outlet that does not lie on exactly
    one domain face is rejected.
    """
    t = geometry.types
    dims = t.shape
    io_mask = (t == NodeType.VELOCITY_INLET) | (t == NodeType.PRESSURE_OUTLET)
    ids = np.flatnonzero(io_mask)
    if ids.size == 0:
        return {}
    coords = np.stack(np.unravel_index(ids, dims), axis=1)
    on_low = coords == 0
    on_high = coords == (np.asarray(dims) - 1)
    face_count = on_low.sum(axis=1) + on_high.sum(axis=1)
    bad = face_count != 1
    if bad.any():
        x, y, z = coords[np.argmax(bad)]
        raise ValueError(
            f"inlet/outlet node ({x}, {y}, {z}) does not lie on exactly one "
            "axis-aligned domain face"
        )
    out = {}
    flat_types = t.ravel()
    for axis in range(3):
        for sign, mask in ((1, on_low[:, axis]), (-1, on_high[:, axis])):
            sel = ids[mask]
            if sel.size == 0:
                continue
            inlet = sel[flat_types[sel] == NodeType.VELOCITY_INLET]
            outlet = sel[flat_types[sel] == NodeType.PRESSURE_OUTLET]
            out[(axis, sign)] = (inlet, outlet)
    return out


def _ordered_sum(g, dirs):
    acc = g[dirs[0]].copy()
    for q in dirs[1:]:
        acc += g[q]
    return acc


def zou_he_velocity(g, closure, u, model):
    """Reconstruct the unknown populations of inlet nodes in place.

    g: (19, m) gathered populations of the face's nodes.  u: prescribed
    velocity triple.  Returns the implied density array.
    """
    dtype = g.dtype
    u = np.asarray(u, dtype=dtype)
    un = dtype.type(closure.inward_sign) * u[closure.axis]
    k0 = _ordered_sum(g, closure.k0)
    km = _ordered_sum(g, closure.km)
    if model is FluidModel.QUASI_COMPRESSIBLE:
        rho = (k0 + dtype.type(2.0) * km) / (dtype.type(1.0) - un)
        j = u[:, None] * rho
    else:
        rho = k0 + dtype.type(2.0) * km + un
        j = np.broadcast_to(u[:, None], (3, g.shape[1])).copy()
    _apply_closure(g, closure, j)
    return rho


def zou_he_pressure(g, closure, rho0, model):
    """Reconstruct the unknown populations of outlet nodes in place.

    The transverse velocity is taken as zero; the normal component follows
    from the prescribed density.  Returns the implied normal momentum.
    """
    dtype = g.dtype
    rho0 = dtype.type(rho0)
    k0 = _ordered_sum(g, closure.k0)
    km = _ordered_sum(g, closure.km)
    # rho0*(1 - un) = K0 + 2 Km (quasi-compressible) and
    # rho0 = K0 + 2 Km + un (incompressible) both give the same jn
    jn = rho0 - (k0 + dtype.type(2.0) * km)
    j = np.zeros((3, g.shape[1]), dtype=dtype)
    j[closure.axis] = dtype.type(closure.inward_sign) * jn
    _apply_closure(g, closure, j)
    return jn


def _apply_closure(g, closure, j):
    """Fill the unknown populations given the face momentum density j."""
    dtype = g.dtype
    third = dtype.type(1.0 / 3.0)
    sixth = dtype.type(1.0 / 6.0)
    half = dtype.type(0.5)
    jn = dtype.type(closure.inward_sign) * j[closure.axis]
    g[closure.unknown_axis] = g[closure.unknown_axis_opp] + third * jn
    n_tau = {}
    for tau, (plus, minus) in closure.tangential.items():
        n_tau[tau] = (
            half * (_ordered_sum(g, plus) - _ordered_sum(g, minus))
            - third * j[tau]
        )
    for q, q_opp, tau, sigma in closure.diagonals:
        s = dtype.type(sigma)
        g[q] = g[q_opp] + sixth * (jn + s * j[tau]) - s * n_tau[tau]
