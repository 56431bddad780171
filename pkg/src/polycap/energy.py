"""Quadratic energy forms on grid functions.

Four kinds are assembled:

  homogeneous      sum_{|a|=m} (m!/a!) ||d^a u||^2
  inhomogeneous    sum_{k<=m} sum_{|a|=k} (k!/a!) ||d^a u||^2
  operator         sum_{a,b} c[a,b] <d^a u, d^b u>
  weighted         sum_x  (sum_{a,b} c[a,b] d^(a+b) u)(x) * u(x) * F(x) h^n

The first three are positive semidefinite by construction (the operator kind
by ellipticity); the weighted kind carries no definiteness guarantee, its
sign behavior is exactly what the positivity module investigates.  Energies
are evaluated as sums of stencil products, so the forms are symmetric by
construction; `apply` realizes the matching symmetric operator matrix-free
and `tosparse` materializes it for small grids.

The gradient tensor norm uses multinomial weights k!/alpha!, which makes it
rotation invariant and lets spherical-harmonic channel reductions match the
grid forms.
"""

import numpy as np

from .errors import ConfigurationError, InputError
from .operators import multi_indices, multinomial
from .stencils import apply_alpha, injection_matrix, pad_array, sparse_alpha, unpad_array

_KINDS = ("homogeneous_m", "inhomogeneous_m", "operator_form", "weighted_operator_form")


def _check_fits(grid, m):
    # widest per-axis stencil for order 2m spans m+1 nodes each way
    if grid.extent < 2 * m:
        raise ConfigurationError(
            f"grid extent {grid.extent} too small for order-{2*m} stencils; need >= {2*m}"
        )


def staggered_radii(grid, alpha):
    """Node radii shifted by h/2 along axes where alpha is odd.

    Odd-order differences live at half-offset points; evaluating radial
    weights there keeps weighted sums second-order accurate.
    """
    ax = grid.axis_coords()
    r2 = np.zeros(grid.shape)
    for axis in range(grid.n):
        c = ax + (0.5 * grid.h if alpha[axis] % 2 else 0.0)
        shape = [1] * grid.n
        shape[axis] = len(c)
        r2 = r2 + (c**2).reshape(shape)
    return np.sqrt(r2)


class EnergyForm:
    """Symmetric quadratic form over grid functions with zero extension."""

    def __init__(self, kind, grid, m, op=None, weight=None, exclude_origin=False):
        if kind not in _KINDS:
            raise InputError(f"unknown energy kind {kind!r}")
        self.kind = kind
        self.grid = grid
        self.m = m
        self.op = op
        self.weight = weight
        self.exclude_origin = exclude_origin
        _check_fits(grid, m)
        self._terms = self._build_terms()

    # each term is (alpha, beta, coefficient, h-power); quad and apply loop them
    def _build_terms(self):
        n, m, h = self.grid.n, self.m, self.grid.h
        terms = []
        if self.kind == "homogeneous_m":
            for alpha in multi_indices(n, m):
                terms.append((alpha, alpha, float(multinomial(alpha)), h ** (n - 2 * m)))
        elif self.kind == "inhomogeneous_m":
            for k in range(m + 1):
                for alpha in multi_indices(n, k):
                    terms.append((alpha, alpha, float(multinomial(alpha)), h ** (n - 2 * k)))
        elif self.kind == "operator_form":
            for (alpha, beta), v in self.op.coefficients.items():
                c = v if alpha == beta else 2.0 * v
                terms.append((alpha, beta, c, h ** (n - 2 * m)))
        elif self.kind == "weighted_operator_form":
            # the operator in the integrand is (-1)^m sum a d^(alpha+beta),
            # whose symbol is the positive P
            sign = (-1.0) ** m
            for (alpha, beta), v in self.op.coefficients.items():
                gamma = tuple(a + b for a, b in zip(alpha, beta))
                c = v if alpha == beta else 2.0 * v
                terms.append((gamma, None, sign * c, h ** (n - 2 * m)))
        return terms

    @property
    def _pad(self):
        # gradient stencils run on a zero-padded lattice so both boundary
        # faces of every axis contribute; the weighted kind is node-centered
        return 0 if self.kind == "weighted_operator_form" else self.m

    def quad(self, u):
        """Energy value of u."""
        u = np.asarray(u, dtype=float)
        if u.shape != self.grid.shape:
            raise InputError("grid function shape does not match the grid")
        if self.kind == "weighted_operator_form":
            lu = np.zeros_like(u)
            for gamma, _, c, hp in self._terms:
                lu += (c * hp) * apply_alpha(u, gamma, centered=True)
            return float((lu * u * self.weight).sum())
        up = pad_array(u, self._pad)
        total = 0.0
        for alpha, beta, c, hp in self._terms:
            da = apply_alpha(up, alpha)
            db = da if beta == alpha else apply_alpha(up, beta)
            total += c * hp * float((da * db).sum())
        return total

    def apply(self, u):
        """Matrix-free A u with quad(u) == sum(u * apply(u))."""
        u = np.asarray(u, dtype=float)
        if self.kind == "weighted_operator_form":
            lu = np.zeros_like(u)
            lt = np.zeros_like(u)
            for gamma, _, c, hp in self._terms:
                lu += (c * hp) * apply_alpha(u, gamma, centered=True)
                lt += (c * hp) * apply_alpha(self.weight * u, gamma, transpose=True, centered=True)
            return 0.5 * (self.weight * lu + lt)
        up = pad_array(u, self._pad)
        out = np.zeros_like(up)
        for alpha, beta, c, hp in self._terms:
            if beta == alpha:
                out += (c * hp) * apply_alpha(apply_alpha(up, alpha), alpha, transpose=True)
            else:
                da = apply_alpha(up, alpha)
                db = apply_alpha(up, beta)
                out += (0.5 * c * hp) * (
                    apply_alpha(db, alpha, transpose=True) + apply_alpha(da, beta, transpose=True)
                )
        return unpad_array(out, self._pad)

    def tosparse(self, max_size=400_000):
        """Materialize as a symmetric CSR matrix (small grids only)."""
        if self.grid.size > max_size:
            raise ConfigurationError(
                f"grid has {self.grid.size} nodes; refusing to materialize above {max_size}"
            )
        from scipy.sparse import diags

        shape = self.grid.shape
        mat = None
        if self.kind == "weighted_operator_form":
            w = diags(self.weight.ravel())
            for gamma, _, c, hp in self._terms:
                dg = sparse_alpha(shape, gamma, centered=True) * (c * hp)
                part = w @ dg
                mat = part if mat is None else mat + part
            mat = 0.5 * (mat + mat.T)
            return mat.tocsr()
        pad = self._pad
        padded_shape = tuple(s + 2 * pad for s in shape)
        P = injection_matrix(shape, pad)
        for alpha, beta, c, hp in self._terms:
            da = sparse_alpha(padded_shape, alpha)
            db = da if beta == alpha else sparse_alpha(padded_shape, beta)
            part = (c * hp) * (da.T @ db)
            mat = part if mat is None else mat + part
        mat = P.T @ (0.5 * (mat + mat.T)) @ P
        return mat.tocsr()

    def dst_spectrum(self):
        """Eigenvalues of the spectrally equivalent power of the compact
        Laplacian on the box, used as a preconditioner model."""
        M = 2 * self.grid.extent + 1
        lam1 = 2.0 - 2.0 * np.cos(np.pi * np.arange(1, M + 1) / (M + 1))
        lam = np.zeros(self.grid.shape)
        for axis in range(self.grid.n):
            shape = [1] * self.grid.n
            shape[axis] = M
            lam = lam + lam1.reshape(shape)
        n, m, h = self.grid.n, self.m, self.grid.h
        if self.kind == "inhomogeneous_m":
            spec = sum(h ** (n - 2 * k) * lam**k for k in range(m + 1))
        else:
            spec = h ** (n - 2 * m) * lam**m
        return spec


def assemble(kind, op, grid, weight=None):
    """Build an energy form; `weight` (a SphereProfile) is required for and
    only for the weighted kind."""
    if kind == "weighted_operator_form":
        if weight is None:
            raise InputError("the weighted form needs a fundamental-solution profile")
        if grid.n <= 2 * op.m:
            raise InputError("the weighted form needs n > 2m")
        wvals = weight.reconstruct_on_grid(grid)
        wvals[grid.origin_index()] = 0.0
        return EnergyForm(kind, grid, op.m, op=op, weight=wvals, exclude_origin=True)
    if kind in ("homogeneous_m", "inhomogeneous_m"):
        return EnergyForm(kind, grid, op.m, op=op)
    if kind == "operator_form":
        return EnergyForm(kind, grid, op.m, op=op)
    raise InputError(f"unknown energy kind {kind!r}")


def hardy_weighted_energy(u, m, grid):
    """sum_{k=1..m} of the weighted gradient sums ||grad_k u|^2 |x|^(2k-n).

    The origin-adjacent values of u must vanish (the test class excludes the
    origin); the singular node itself carries zero weight.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != grid.shape:
        raise InputError("grid function shape does not match the grid")
    center = grid.origin_index()
    lo = tuple(c - 2 * m for c in center)
    hi = tuple(c + 2 * m + 1 for c in center)
    window = tuple(slice(max(a, 0), b) for a, b in zip(lo, hi))
    if np.any(u[window] != 0.0):
        raise InputError("u must vanish on the 2m-neighborhood of the origin node")
    n, h = grid.n, grid.h
    from .grids import Grid as _Grid

    padded = _Grid(n, h, grid.extent + m)
    up = pad_array(u, m)
    total = 0.0
    for k in range(1, m + 1):
        for alpha in multi_indices(n, k):
            w = staggered_radii(padded, alpha)
            with np.errstate(divide="ignore"):
                w = np.where(w > 0, w ** (2 * k - n), 0.0)
            d = apply_alpha(up, alpha)
            total += multinomial(alpha) * h ** (n - 2 * k) * float((d * d * w).sum())
    return total


class HardyForm:
    """Symmetric operator of the weighted gradient comparison sum."""

    def __init__(self, grid, m):
        self.grid = grid
        self.m = m
        _check_fits(grid, m)
        self._parts = []
        n, h = grid.n, grid.h
        from .grids import Grid as _Grid

        padded = _Grid(n, h, grid.extent + m)
        for k in range(1, m + 1):
            for alpha in multi_indices(n, k):
                w = staggered_radii(padded, alpha)
                with np.errstate(divide="ignore"):
                    w = np.where(w > 0, w ** (2 * k - n), 0.0)
                self._parts.append((alpha, multinomial(alpha) * h ** (n - 2 * k), w))

    def quad(self, u):
        up = pad_array(np.asarray(u, dtype=float), self.m)
        total = 0.0
        for alpha, c, w in self._parts:
            d = apply_alpha(up, alpha)
            total += c * float((d * d * w).sum())
        return float(total)

    def apply(self, u):
        up = pad_array(np.asarray(u, dtype=float), self.m)
        out = np.zeros_like(up)
        for alpha, c, w in self._parts:
            out += c * apply_alpha(w * apply_alpha(up, alpha), alpha, transpose=True)
        return unpad_array(out, self.m)

    def tosparse(self, max_size=400_000):
        if self.grid.size > max_size:
            raise ConfigurationError("grid too large to materialize")
        from scipy.sparse import diags

        padded_shape = tuple(s + 2 * self.m for s in self.grid.shape)
        P = injection_matrix(self.grid.shape, self.m)
        mat = None
        for alpha, c, w in self._parts:
            da = sparse_alpha(padded_shape, alpha)
            part = c * (da.T @ diags(w.ravel()) @ da)
            mat = part if mat is None else mat + part
        return (P.T @ (0.5 * (mat + mat.T)) @ P).tocsr()
