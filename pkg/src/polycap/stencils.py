"""Finite-difference stencils for partial derivatives on uniform grids.

Per-axis rule: even derivative orders use the compact central stencil
(second-order accurate at nodes), odd orders compose the even stencil with a
single forward difference (second-order accurate at half-offset points).
Mixed derivatives are tensor compositions of the per-axis stencils.  The
half-offset choice for odd orders avoids the odd/even sublattice decoupling
of wide central first differences, and it makes the assembled gradient-tensor
forms of (-Delta)^m equal to powers of the compact discrete Laplacian, which
the solvers exploit for preconditioning.

A stencil is (offsets, coeffs): integer offsets and the coefficients of the
*undivided* difference; the h**(-order) factor is applied by callers.
Application uses zero extension outside the array, matching functions that
vanish outside the computational box.
"""

import numpy as np

from .errors import InputError

_CENTRAL2 = (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0]))
_CENTRAL1 = (np.array([-1, 1]), np.array([-0.5, 0.5]))
_FORWARD = (np.array([0, 1]), np.array([-1.0, 1.0]))


def _convolve(st1, st2):
    off1, c1 = st1
    off2, c2 = st2
    table = {}
    for o1, a in zip(off1, c1):
        for o2, b in zip(off2, c2):
            table[o1 + o2] = table.get(o1 + o2, 0.0) + a * b
    offs = np.array(sorted(table))
    return offs, np.array([table[o] for o in offs])


def axis_stencil(order, centered=False):
    """Undivided difference stencil for d^order/dx^order.

    With centered=True the odd part uses the node-centered wide difference
    instead of the half-offset forward one; that variant is only meant for
    forms that are evaluated, never solved, since it decouples sublattices.
    """
    if order < 0:
        raise InputError("derivative order must be nonnegative")
    st = (np.array([0]), np.array([1.0]))
    for _ in range(order // 2):
        st = _convolve(st, _CENTRAL2)
    if order % 2:
        st = _convolve(st, _CENTRAL1 if centered else _FORWARD)
    return st


def apply_axis(u, axis, offsets, coeffs, transpose=False):
    """Apply a one-axis stencil with zero extension; transpose flips offsets."""
    out = np.zeros_like(u)
    size = u.shape[axis]
    for off, c in zip(offsets, coeffs):
        o = -int(off) if transpose else int(off)
        if abs(o) >= size:
            continue
        src = [slice(None)] * u.ndim
        dst = [slice(None)] * u.ndim
        if o >= 0:
            src[axis] = slice(o, size)
            dst[axis] = slice(0, size - o)
        else:
            src[axis] = slice(0, size + o)
            dst[axis] = slice(-o, size)
        out[tuple(dst)] += c * u[tuple(src)]
    return out


def apply_alpha(u, alpha, transpose=False, centered=False):
    """Apply the undivided difference for the multi-index alpha."""
    out = u
    for axis, order in enumerate(alpha):
        if order:
            offs, coeffs = axis_stencil(order, centered=centered)
            out = apply_axis(out, axis, offs, coeffs, transpose=transpose)
    return out


def alpha_offsets(alpha, centered=False):
    """All (offset-vector, coefficient) pairs of the tensor stencil."""
    entries = [((0,) * len(alpha), 1.0)]
    for axis, order in enumerate(alpha):
        if not order:
            continue
        offs, coeffs = axis_stencil(order, centered=centered)
        new = []
        for vec, val in entries:
            for o, c in zip(offs, coeffs):
                v = list(vec)
                v[axis] += int(o)
                new.append((tuple(v), val * c))
        entries = new
    return entries


def pad_array(u, pad):
    """Zero extension made explicit: pad each axis by `pad` zeros."""
    if pad <= 0:
        return u
    return np.pad(u, pad)


def unpad_array(u, pad):
    if pad <= 0:
        return u
    sl = tuple(slice(pad, -pad) for _ in range(u.ndim))
    return u[sl]


def injection_matrix(shape, pad):
    """Sparse injection of a box into its zero-padded enlargement."""
    from scipy.sparse import coo_matrix

    padded = tuple(s + 2 * pad for s in shape)
    size = int(np.prod(shape))
    idx = np.arange(int(np.prod(padded))).reshape(padded)
    inner = tuple(slice(pad, pad + s) for s in shape)
    rows = idx[inner].ravel()
    return coo_matrix((np.ones(size), (rows, np.arange(size))),
                      shape=(int(np.prod(padded)), size)).tocsr()


def sparse_alpha(shape, alpha, transpose=False, centered=False):
    """Materialize the alpha stencil as a CSR matrix over a box of `shape`."""
    from scipy.sparse import coo_matrix

    size = int(np.prod(shape))
    idx = np.arange(size).reshape(shape)
    rows, cols, vals = [], [], []
    for vec, val in alpha_offsets(alpha, centered=centered):
        if transpose:
            vec = tuple(-v for v in vec)
        src = [slice(None)] * len(shape)
        dst = [slice(None)] * len(shape)
        ok = True
        for axis, o in enumerate(vec):
            if abs(o) >= shape[axis]:
                ok = False
                break
            if o >= 0:
                src[axis] = slice(o, shape[axis])
                dst[axis] = slice(0, shape[axis] - o)
            else:
                src[axis] = slice(0, shape[axis] + o)
                dst[axis] = slice(-o, shape[axis])
        if not ok:
            continue
        rows.append(idx[tuple(dst)].ravel())
        cols.append(idx[tuple(src)].ravel())
        vals.append(np.full(rows[-1].size, val))
    mat = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    return mat.tocsr()
