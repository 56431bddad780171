"""Reduced solvers for rotation-symmetric problems.

Two reductions of the polyharmonic energy are provided:

* a one-dimensional radial solver for fully radial targets (balls and shells
  centered at the origin) in any dimension, valid for every half-order m,
  built on the identity  integral |D^m u|^2 dx = integral ((-Delta)^(m/2) u)^2
  (even m) or |grad (-Delta)^((m-1)/2) u|^2 (odd m) for compactly supported u;

* a two-dimensional (r, z) solver for bodies of revolution about the last
  axis, for m = 1 and m = 2, using the cylindrical form of the gradient and
  Hessian tensor norms.

Both use a staggered radial grid r_i = (i + 1/2) h with even reflection at
the axis, so the singular weight never hits a node.  These backends exist
because Cartesian boxes in dimensions 6, 7, 8 are out of reach at any useful
resolution; they are validated against the Cartesian path in dimensions 3
and 5 by the test suite.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, diags, identity
from scipy.sparse.linalg import splu

from .errors import InputError, UnsupportedRegimeError


def sphere_surface(n):
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


# -- 1-D radial ---------------------------------------------------------------


@dataclass(frozen=True)
class RadialGrid:
    n: int
    h: float
    nodes: int

    @property
    def r(self):
        return self.h * (np.arange(self.nodes) + 0.5)

    @property
    def faces(self):
        # face j sits between nodes j-1 and j at radius j*h; face 0 is the axis
        return self.h * np.arange(self.nodes + 1)


def _radial_gradient_matrix(rg):
    """Forward difference at interior faces plus the zero-extension outer face."""
    N = rg.nodes
    rows, cols, vals = [], [], []
    for j in range(1, N):  # face j between nodes j-1, j
        rows += [j, j]
        cols += [j, j - 1]
        vals += [1.0 / rg.h, -1.0 / rg.h]
    # outer face N: u_N = 0 outside
    rows += [N]
    cols += [N - 1]
    vals += [-1.0 / rg.h]
    return coo_matrix((vals, (rows, cols)), shape=(N + 1, N)).tocsr()


def _radial_laplacian_matrix(rg):
    """Conservative radial Laplacian with even reflection at the axis."""
    N, h, n = rg.nodes, rg.h, rg.n
    r = rg.r
    rf = rg.faces
    rows, cols, vals = [], [], []
    for i in range(N):
        a_lo = rf[i] ** (n - 1)
        a_hi = rf[i + 1] ** (n - 1)
        c = 1.0 / (h * h * r[i] ** (n - 1))
        # -(a_hi + a_lo) u_i + a_hi u_{i+1} + a_lo u_{i-1}; reflection kills a_lo at i=0
        rows.append(i); cols.append(i); vals.append(-c * (a_hi + (a_lo if i > 0 else 0.0)))
        if i + 1 < N:
            rows.append(i); cols.append(i + 1); vals.append(c * a_hi)
        if i > 0:
            rows.append(i); cols.append(i - 1); vals.append(c * a_lo)
    return coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()


def radial_energy_matrix(m, rg):
    """Sparse matrix of the order-m homogeneous energy for radial functions."""
    n = rg.n
    omega = sphere_surface(n)
    lap = _radial_laplacian_matrix(rg)
    if m % 2 == 0:
        core = identity(rg.nodes, format="csr")
        for _ in range(m // 2):
            core = lap @ core
        w = diags(rg.r ** (n - 1)) * (omega * rg.h)
        return (core.T @ w @ core).tocsr()
    grad = _radial_gradient_matrix(rg)
    core = identity(rg.nodes, format="csr")
    for _ in range((m - 1) // 2):
        core = lap @ core
    gw = diags(rg.faces ** (n - 1)) * (omega * rg.h)
    op = grad @ core
    return (op.T @ gw @ op).tocsr()


def ball_potential_exact(m, n, ball_radius=1.0):
    """Closed-form capacitary potential of a centered ball for (-Delta)^m.

    Outside the ball the minimizer is a combination of the decaying powers
    r^(2m-n-2j), j = 0..m-1, matched so that u and its first m-1 radial
    derivatives are continuous at the surface (u is identically 1 inside).
    Returns (coeffs, exponents, capacity); evaluate with
    ``evaluate_ball_potential``.
    """
    if n <= 2 * m:
        raise UnsupportedRegimeError(f"ball potential needs n > 2m, got n={n}, m={m}")
    R = float(ball_radius)
    exps = np.array([2 * m - n - 2 * j for j in range(m)], dtype=float)
    # u^(k)(R) = delta_{k0}: rows are falling-factorial products of each power
    V = np.zeros((m, m))
    rhs = np.zeros(m)
    rhs[0] = 1.0
    for k in range(m):
        for j, e in enumerate(exps):
            fall = 1.0
            for i in range(k):
                fall *= e - i
            V[k, j] = fall * R ** (e - k)
    coeffs = np.linalg.solve(V, rhs)
    cap = _ball_energy_exact(m, n, coeffs, exps, R)
    return coeffs, exps, cap


def _power_sum_derivative(coeffs, exps, order=1):
    c = np.array(coeffs, dtype=float)
    e = np.array(exps, dtype=float)
    for _ in range(order):
        c = c * e
        e = e - 1.0
    return c, e


def _ball_energy_exact(m, n, coeffs, exps, R):
    """Exact order-m gradient energy of the matched power-sum potential."""
    c, e = np.array(coeffs, float), np.array(exps, float)
    # apply Delta (m//2 times), then the radial gradient if m is odd
    for _ in range(m // 2):
        # Delta r^e = e (e + n - 2) r^(e-2) on radial functions
        c = c * e * (e + n - 2.0)
        e = e - 2.0
    if m % 2:
        c, e = _power_sum_derivative(c, e)
    # integral over r > R of (sum c r^e)^2 r^(n-1) dr, term by term
    total = 0.0
    for ci, ei in zip(c, e):
        for cj, ej in zip(c, e):
            p = ei + ej + n - 1.0
            # p < -1 always since each exponent is at most m - n - 1 +小 margin
            total += ci * cj * R ** (p + 1.0) / (-(p + 1.0))
    return sphere_surface(n) * total


def evaluate_ball_potential(m, n, ball_radius, r):
    """U(r) of the centered-ball capacitary potential, exact formula."""
    coeffs, exps, _ = ball_potential_exact(m, n, ball_radius)
    r = np.asarray(r, dtype=float)
    out = np.ones_like(r)
    outside = r > ball_radius
    ro = r[outside]
    acc = np.zeros_like(ro)
    for c, e in zip(coeffs, exps):
        acc += c * ro**e
    out[outside] = acc
    return out


def radial_ball_potential(m, n, ball_radius=1.0, h=None, box=None):
    """Capacitary potential and capacity of a centered ball via the 1-D solver.

    Returns (rgrid, u, capacity).  Supported for m <= 2; the order-6 radial
    system is too ill-conditioned in double precision for a trustworthy
    discrete minimizer, so higher m should use ``ball_potential_exact``.
    """
    if n <= 2 * m:
        raise UnsupportedRegimeError(f"radial potential needs n > 2m, got n={n}, m={m}")
    if m > 2:
        raise UnsupportedRegimeError(
            "finite-difference radial solve is limited to m <= 2; "
            "use ball_potential_exact for higher orders"
        )
    if h is None:
        h = ball_radius / 200.0
    if box is None:
        box = 400.0 * ball_radius
    rg = RadialGrid(n, h, int(round(box / h)))
    A = radial_energy_matrix(m, rg)
    fixed = rg.r <= ball_radius
    if not fixed.any():
        raise InputError("ball radius below grid resolution")
    free = ~fixed
    u = np.zeros(rg.nodes)
    u[fixed] = 1.0
    rhs = -(A @ u)[free]
    Aff = A[free][:, free].tocsc()
    # symmetric equilibration keeps the direct solve stable under the r^(n-1) weights
    d = np.sqrt(Aff.diagonal())
    from scipy.sparse import diags as _diags

    Dm = _diags(1.0 / d)
    u[free] = (splu((Dm @ Aff @ Dm).tocsc()).solve(rhs / d)) / d
    cap = float(u @ (A @ u))
    return rg, u, cap


def radial_ball_capacity(m, n, ball_radius=1.0, h=None, box=None):
    if m > 2:
        return ball_potential_exact(m, n, ball_radius)[2]
    return radial_ball_potential(m, n, ball_radius, h, box)[2]


# -- 2-D axisymmetric ---------------------------------------------------------


@dataclass(frozen=True)
class AxisymGrid:
    """Half-plane grid: r staggered at (i+1/2)h, z node-centered on [-Z, Z]."""

    n: int
    h: float
    r_nodes: int
    z_extent: int

    @property
    def shape(self):
        return (self.r_nodes, 2 * self.z_extent + 1)

    @property
    def r(self):
        return self.h * (np.arange(self.r_nodes) + 0.5)

    @property
    def z(self):
        return self.h * np.arange(-self.z_extent, self.z_extent + 1)

    def mask_from_region(self, region):
        """Rasterize a body of revolution; the first column also samples the
        axis itself, so sets thinner than the staggering stay visible."""
        R, Z = np.meshgrid(self.r, self.z, indexing="ij")
        pts = np.zeros((R.size, self.n))
        pts[:, 0] = R.ravel()
        pts[:, -1] = Z.ravel()
        inside = region.contains(pts).reshape(self.shape)
        axis_pts = np.zeros((len(self.z), self.n))
        axis_pts[:, -1] = self.z
        inside[0] |= region.contains(axis_pts)
        return inside


def _axisym_terms(ag, m):
    """(matrix, weight) pairs so that the energy is sum w . (M u)^2 * h^2 * omega."""
    import scipy.sparse as sp

    Nr, Nz = ag.shape
    n, h = ag.n, ag.h
    size = Nr * Nz
    idx = np.arange(size).reshape(Nr, Nz)

    def face_r(i):
        return (i + 1.0) * h  # r-face between rows i, i+1

    def op_from(entries):
        rows, cols, vals = entries
        return sp.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()

    def dr_forward():
        # rows are r-faces at (i+1) h for i = 0..Nr-1; the axis face carries
        # no energy (even reflection), the outer face sees the zero exterior
        rows, cols, vals = [], [], []
        for i in range(Nr):
            rows += list(idx[i]); cols += list(idx[i]); vals += [-1.0 / h] * Nz
            if i + 1 < Nr:
                rows += list(idx[i]); cols += list(idx[i + 1]); vals += [1.0 / h] * Nz
        return op_from((rows, cols, vals))

    def dz_forward():
        # rectangular: one row per z-face including both outer faces
        rows, cols, vals = [], [], []
        fidx = np.arange(Nr * (Nz + 1)).reshape(Nr, Nz + 1)
        for j in range(Nz + 1):
            if j < Nz:
                rows += list(fidx[:, j]); cols += list(idx[:, j]); vals += [1.0 / h] * Nr
            if j > 0:
                rows += list(fidx[:, j]); cols += list(idx[:, j - 1]); vals += [-1.0 / h] * Nr
        return sp.coo_matrix((vals, (rows, cols)), shape=(Nr * (Nz + 1), size)).tocsr()

    def drz_forward():
        # corner-centered mixed difference: rows at (r-face i+1, z-face j+1/2)
        rows, cols, vals = [], [], []
        fidx = np.arange(Nr * (Nz + 1)).reshape(Nr, Nz + 1)
        inv = 1.0 / (h * h)
        for i in range(Nr):
            for j in range(Nz + 1):
                row = fidx[i, j]
                for (di, dj, s) in ((0, 0, 1.0), (1, 0, -1.0), (0, -1, -1.0), (1, -1, 1.0)):
                    ii, jj = i + di, j + dj
                    if 0 <= ii < Nr and 0 <= jj < Nz:
                        rows.append(row); cols.append(idx[ii, jj]); vals.append(s * inv)
        return sp.coo_matrix((vals, (rows, cols)), shape=(Nr * (Nz + 1), size)).tocsr()

    rr = np.repeat(ag.r, Nz).reshape(Nr, Nz)
    rface = np.repeat((np.arange(Nr) + 1.0) * h, Nz).reshape(Nr, Nz)
    rr_zface = np.repeat(ag.r, Nz + 1).reshape(Nr, Nz + 1)
    rface_zface = np.repeat((np.arange(Nr) + 1.0) * h, Nz + 1).reshape(Nr, Nz + 1)
    omega = sphere_surface(n - 1)
    meas = omega * h * h

    Dr = dr_forward()
    Dz = dz_forward()
    terms = []
    if m == 1:
        terms.append((Dr, meas * rface ** (n - 2)))
        terms.append((Dz, meas * rr_zface ** (n - 2)))
        return terms
    if m != 2:
        raise UnsupportedRegimeError("axisymmetric solver supports m = 1 and m = 2")

    # u_rr with even reflection across the axis (ghost u[-1] = u[0])
    rows, cols, vals = [], [], []
    for i in range(Nr):
        c = 1.0 / (h * h)
        rows += list(idx[i]); cols += list(idx[i]); vals += [(-2.0 if i > 0 else -1.0) * c] * Nz
        if i + 1 < Nr:
            rows += list(idx[i]); cols += list(idx[i + 1]); vals += [c] * Nz
        if i > 0:
            rows += list(idx[i]); cols += list(idx[i - 1]); vals += [c] * Nz
    Drr = op_from((rows, cols, vals))

    rows, cols, vals = [], [], []
    for j in range(Nz):
        c = 1.0 / (h * h)
        rows += list(idx[:, j]); cols += list(idx[:, j]); vals += [-2.0 * c] * Nr
        if j + 1 < Nz:
            rows += list(idx[:, j]); cols += list(idx[:, j + 1]); vals += [c] * Nr
        if j > 0:
            rows += list(idx[:, j]); cols += list(idx[:, j - 1]); vals += [c] * Nr
    Dzz = op_from((rows, cols, vals))

    Drz = drz_forward()
    terms.append((Drr, meas * rr ** (n - 2)))
    terms.append((Dzz, meas * rr ** (n - 2)))
    terms.append((Drz, 2.0 * meas * rface_zface ** (n - 2)))
    # (n-2) (u_r / r)^2 evaluated at r-faces
    terms.append((Dr, (n - 2.0) * meas * rface ** (n - 4)))
    return terms


def axisym_energy_matrix(ag, m):
    mat = None
    for op, w in _axisym_terms(ag, m):
        part = op.T @ diags(w.ravel()) @ op
        mat = part if mat is None else mat + part
    return (0.5 * (mat + mat.T)).tocsr()


def axisym_capacity(region, m, n, h, r_box, kind="homogeneous"):
    """Variational capacity of a body of revolution on an (r, z) grid.

    kind "homogeneous" uses the order-m gradient energy; "inhomogeneous" adds
    the lower-order gradient sums (the Bessel-type surrogate).
    """
    if n < 3:
        raise UnsupportedRegimeError("axisymmetric reduction needs n >= 3")
    ag = AxisymGrid(n, h, int(round(r_box / h)), int(round(r_box / h)))
    fixed = ag.mask_from_region(region)
    if not fixed.any():
        return 0.0, ag, np.zeros(ag.shape)
    A = axisym_energy_matrix(ag, m)
    if kind == "inhomogeneous":
        for k in range(m):
            if k == 0:
                omega = sphere_surface(n - 1)
                rr = np.repeat(ag.r, ag.shape[1]).reshape(ag.shape)
                A = A + diags((omega * ag.h * ag.h * rr ** (n - 2)).ravel())
            else:
                A = A + axisym_energy_matrix(ag, k)
    u = np.zeros(ag.shape[0] * ag.shape[1])
    fix = fixed.ravel()
    u[fix] = 1.0
    free = ~fix
    rhs = -(A @ u)[free]
    Aff = A[free][:, free].tocsc()
    u[free] = splu(Aff).solve(rhs)
    cap = float(u @ (A @ u))
    return cap, ag, u.reshape(ag.shape)


def axisym_dirichlet(op_m, n, omega_fixed, source, ag, rtol=1e-10):
    """Dirichlet solve on the (r, z) half-plane grid.

    omega_fixed is the boolean array of nodes constrained to zero (the
    complement of the domain), source the nodal source density; returns u.
    The variational system uses the axisymmetric order-m energy and the
    weighted cell measure for the source pairing.
    """
    A = axisym_energy_matrix(ag, op_m)
    omega_fixed = np.asarray(omega_fixed, dtype=bool)
    rr = np.repeat(ag.r, ag.shape[1]).reshape(ag.shape)
    meas = sphere_surface(n - 1) * ag.h * ag.h * rr ** (n - 2)
    rhs = (np.asarray(source, dtype=float) * meas).ravel()
    free = ~omega_fixed.ravel()
    u = np.zeros(ag.shape[0] * ag.shape[1])
    Aff = A[free][:, free].tocsc()
    u[free] = splu(Aff).solve(rhs[free])
    return u.reshape(ag.shape)
