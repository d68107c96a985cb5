"""Collision operators: equilibria, macroscopic moments, LBGK and MRT.

Two fluid models are supported.  The quasi-compressible equilibrium carries
the density as a factor of the whole bracket,

    f_eq_i = w_i * rho * (1 + (c_i.u)/cs2 + (c_i.u)^2/(2 cs4) - u^2/(2 cs2)),

while the incompressible variant decouples density from momentum,

    f_eq_i = w_i * (rho + (c_i.u)/cs2 + (c_i.u)^2/(2 cs4) - u^2/(2 cs2)),

with cs2 = 1/3.  Velocity follows the matching definition: u = sum(c_i f_i)
divided by rho for the quasi-compressible model, undivided for the
incompressible one.  Pressure is rho/3 in both.

All functions are elementwise over trailing axes and keep the dtype of their
inputs; reductions over the 19 directions run in fixed index order so results
do not depend on how the node axis is chunked.
"""

import enum

import numpy as np

from .lattice import E_VECTORS, OPPOSITE, WEIGHTS


class FluidModel(enum.Enum):
    INCOMPRESSIBLE = "incompressible"
    QUASI_COMPRESSIBLE = "quasi-compressible"


class CollisionModel(enum.Enum):
    LBGK = "lbgk"
    MRT = "mrt"


class DivergenceError(RuntimeError):
    """Simulation produced NaN values or a non-positive density."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


def _ordered_sum(terms):
    """Sum arrays in fixed order (no pairwise re-bracketing)."""
    it = iter(terms)
    acc = next(it).copy()
    for t in it:
        acc += t
    return acc


def density(f):
    """rho = sum_i f_i, accumulated in direction index order."""
    return _ordered_sum(f[q] for q in range(19))


def momentum(f):
    """First moment sum_i c_i f_i, per component in direction index order."""
    j = []
    for a in range(3):
        acc = np.zeros_like(f[0])
        for q in range(19):
            e = int(E_VECTORS[q, a])
            if e == 1:
                acc += f[q]
            elif e == -1:
                acc -= f[q]
        j.append(acc)
    return np.stack(j)


def macroscopic(model, f):
    """Density, velocity and pressure of one or many nodes.

    f has shape (19, ...).  Returns (rho, u, p) with u of shape (3, ...).
    For the quasi-compressible model a non-positive density is a divergence.
    """
    f = np.asarray(f)
    rho = density(f)
    j = momentum(f)
    if model is FluidModel.QUASI_COMPRESSIBLE:
        if np.any(rho <= 0):
            raise DivergenceError("non-positive density in quasi-compressible flow")
        u = j / rho
    else:
        u = j
    p = rho / np.asarray(3.0, dtype=rho.dtype)
    return rho, u, p


def equilibrium(model, rho, u):
    """Equilibrium distributions for all 19 directions, shape (19, ...)."""
    rho = np.asarray(rho)
    u = np.asarray(u)
    dtype = np.result_type(rho, u)
    ux, uy, uz = u[0], u[1], u[2]
    usq = ux * ux + uy * uy + uz * uz
    out = np.empty((19,) + np.broadcast_shapes(rho.shape, usq.shape), dtype=dtype)
    c3 = dtype.type(3.0)
    c45 = dtype.type(4.5)
    c15 = dtype.type(1.5)
    one = dtype.type(1.0)
    for q in range(19):
        ex, ey, ez = (int(c) for c in E_VECTORS[q])
        cu = np.zeros_like(usq)
        if ex:
            cu += ux if ex == 1 else -ux
        if ey:
            cu += uy if ey == 1 else -uy
        if ez:
            cu += uz if ez == 1 else -uz
        w = dtype.type(WEIGHTS[q])
        bracket = c3 * cu + c45 * cu * cu - c15 * usq
        if model is FluidModel.QUASI_COMPRESSIBLE:
            out[q] = w * (rho * (one + bracket))
        else:
            out[q] = w * (rho + bracket)
    return out


def collide_lbgk(model, f, tau):
    """Single-relaxation-time collision f + (1/tau)(f_eq - f)."""
    f = np.asarray(f)
    rho, u, _ = macroscopic(model, f)
    feq = equilibrium(model, rho, u)
    inv_tau = f.dtype.type(1.0 / tau)
    return f + inv_tau * (feq - f)


def _moment_rows():
    """Orthogonal D3Q19 moment basis (Gram-Schmidt family).

    Row order: density, energy, energy squared, momentum and energy flux per
    axis (jx, qx, jy, qy, jz, qz), then the five stress moments with their
    quartic partners (3pxx, 3pixx, pww, piww, pxy, pyz, pxz) and the three
    cubic modes (mx, my, mz).
    """
    rows = []
    e = E_VECTORS.astype(np.int64)
    ex, ey, ez = e[:, 0], e[:, 1], e[:, 2]
    e2 = ex * ex + ey * ey + ez * ez
    rows.append(np.ones(19, dtype=np.int64))          # rho
    rows.append(19 * e2 - 30)                         # e
    rows.append((21 * e2 * e2 - 53 * e2 + 24) // 2)   # eps
    for ea in (ex, ey, ez):
        rows.append(ea)                               # j
        rows.append((5 * e2 - 9) * ea)                # q
    rows.append(3 * ex * ex - e2)                     # 3 pxx
    rows.append((3 * e2 - 5) * (3 * ex * ex - e2))    # 3 pixx
    rows.append(ey * ey - ez * ez)                    # pww
    rows.append((3 * e2 - 5) * (ey * ey - ez * ez))   # piww
    rows.append(ex * ey)                              # pxy
    rows.append(ey * ez)                              # pyz
    rows.append(ex * ez)                              # pxz
    rows.append((ey * ey - ez * ez) * ex)             # mx
    rows.append((ez * ez - ex * ex) * ey)             # my
    rows.append((ex * ex - ey * ey) * ez)             # mz
    return np.stack(rows)


MOMENT_NAMES = (
    "rho", "e", "eps",
    "jx", "qx", "jy", "qy", "jz", "qz",
    "3pxx", "3pixx", "pww", "piww",
    "pxy", "pyz", "pxz",
    "mx", "my", "mz",
)

MOMENT_MATRIX = _moment_rows()

# conserved moments (zero rate) and the five viscosity-setting stress moments
CONSERVED_MOMENTS = (0, 3, 5, 7)
STRESS_MOMENTS = (9, 11, 13, 14, 15)


def moment_matrix_inverse():
    """Exact inverse M^T D^-1 using the rows' orthogonality."""
    m = MOMENT_MATRIX.astype(np.float64)
    norms = (m * m).sum(axis=1)
    return m.T / norms


def default_mrt_rates(tau):
    """Standard relaxation-rate set with the shear modes at 1/tau.

    Conserved moments get rate 0; the energy modes, flux modes, quartic
    partners and cubic modes use the customary fixed values.
    """
    if tau <= 0.5:
        raise ValueError(f"relaxation time must exceed 0.5: {tau}")
    s = np.zeros(19)
    s_nu = 1.0 / tau
    s[1] = 1.19              # energy
    s[2] = 1.4               # energy squared
    s[4] = s[6] = s[8] = 1.2     # energy flux
    s[10] = s[12] = 1.4      # quartic stress partners
    for i in STRESS_MOMENTS:
        s[i] = s_nu
    s[16] = s[17] = s[18] = 1.98
    return s


def mrt_operator(rates, dtype=np.float64):
    """Velocity-space collision matrix M^-1 diag(rates) M."""
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (19,):
        raise ValueError(f"expected 19 moment rates, got shape {rates.shape}")
    m = MOMENT_MATRIX.astype(np.float64)
    op = moment_matrix_inverse() @ (rates[:, None] * m)
    return op.astype(dtype)


def apply_operator(op, delta):
    """Apply a 19x19 operator to (19, ...) data with a fixed-order loop.

    Written as 19 fixed-order accumulations so the result is bitwise
    independent of how the trailing axes are chunked.
    """
    out = np.empty_like(delta)
    for i in range(19):
        acc = np.zeros_like(delta[0])
        row = op[i]
        for jq in range(19):
            c = row[jq]
            if c != 0.0:
                acc += c * delta[jq]
        out[i] = acc
    return out


def collide_mrt(model, f, rates=None, operator=None):
    """Moment-space collision f + M^-1 S M (f_eq - f).

    The equilibrium moments are those of the configured fluid model's
    equilibrium, so setting every rate to 1/tau reproduces collide_lbgk.
    """
    f = np.asarray(f)
    if operator is None:
        if rates is None:
            raise ValueError("either moment rates or a precomputed operator is required")
        operator = mrt_operator(rates, dtype=f.dtype)
    rho, u, _ = macroscopic(model, f)
    feq = equilibrium(model, rho, u)
    return f + apply_operator(operator, feq - f)


def reflect(f):
    """Reverse all directions: f_i <- f_opposite(i)."""
    return np.asarray(f)[OPPOSITE]
