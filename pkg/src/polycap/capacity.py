"""Variational capacities of compact node sets and dyadic annulus series.

cap_m minimizes the order-m homogeneous gradient energy over grid functions
equal to 1 on the target set (with implicit zero extension outside the box);
the minimum is the capacity.  bessel_capacity minimizes the full order-m
Sobolev energy instead, a two-sided-comparable stand-in for the potential
theoretic capacity of order 2m; every consumer downstream only relies on
divergence or convergence of capacity series, which comparability preserves.

Box truncation biases capacities upward by a relative O((K/R_box)^(n-2m));
`box_levels=2` runs the box at two sizes and removes the leading term by
Richardson extrapolation in R^(2m-n), which is what makes desk-size boxes
reach percent-level accuracy.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyForm
from .errors import InputError, UnsupportedRegimeError
from .grids import Ball, Cone, Cusp, Grid, Intersection, Mask, Ray, Region, Shell, Union
from .radial import axisym_capacity
from .solvers import solve_constrained


def is_axisymmetric(region, n):
    """True when the region is a declared body of revolution about the last axis."""
    if isinstance(region, Ball):
        c = region.center
        return not c or all(v == 0.0 for v in c[:-1])
    if isinstance(region, (Shell, Cone, Cusp)):
        return True
    if isinstance(region, Ray):
        return region.axis == n - 1
    if isinstance(region, (Union, Intersection)):
        return all(is_axisymmetric(p, n) for p in region.parts)
    return False


@dataclass
class CapacityValue:
    value: float
    kind: str
    grid_h: float
    grid_extent: int
    refinement_estimate: float = float("nan")
    raw_values: dict = field(default_factory=dict)
    iterations: int = 0

    def as_dict(self):
        return {
            "value": self.value,
            "kind": self.kind,
            "grid_h": self.grid_h,
            "grid_extent": self.grid_extent,
            "refinement_estimate": self.refinement_estimate,
            "raw_values": dict(self.raw_values),
        }


def _target_mask(target, grid):
    if isinstance(target, Mask):
        if target.grid != grid:
            raise InputError("mask was rasterized on a different grid")
        return target
    if isinstance(target, Region):
        return target.mask(grid)
    raise InputError("capacity target must be a Mask or a Region")


def _one_box_capacity(kind, m, grid, mask, rtol=1e-8):
    form = EnergyForm(kind, grid, m)
    u, info = solve_constrained(form, mask.where, 1.0, rtol=rtol)
    return info["energy"], info["iterations"], u


def cap_m(target, m, grid, box_levels=1, rtol=1e-8, keep_field=False):
    """Order-m homogeneous capacity of a compact node set.

    With box_levels=2 the target region is re-rasterized on a box twice as
    large (same spacing) and the pair is extrapolated in R^(2m-n); this needs
    a Region target, a plain Mask cannot be re-rasterized.
    """
    n = grid.n
    if n <= 2 * m:
        raise UnsupportedRegimeError(
            f"homogeneous capacity needs n > 2m (got n={n}, m={m}); "
            "use bessel_capacity for the borderline dimension"
        )
    mask = _target_mask(target, grid)
    if mask.empty:
        return CapacityValue(0.0, "homogeneous", grid.h, grid.extent)
    pts = mask.points()
    if np.abs(pts).max() > grid.box_radius - 2 * m * grid.h:
        raise InputError("target set reaches the box boundary; enlarge the extent")

    value, iters, u = _one_box_capacity("homogeneous_m", m, grid, mask, rtol)
    raw = {f"extent_{grid.extent}": value}
    est = float("nan")
    if box_levels >= 2:
        if not isinstance(target, Region) and mask.region is None:
            raise InputError("box extrapolation needs a geometric region target")
        region = target if isinstance(target, Region) else mask.region
        big = Grid(n, grid.h, 2 * grid.extent)
        vbig, ibig, _ = _one_box_capacity("homogeneous_m", m, big, region.mask(big), rtol)
        raw[f"extent_{big.extent}"] = vbig
        # cap(R) ~ cap_inf + c R^(2m-n)
        weight = 2.0 ** (2 * m - n)
        extrapolated = (vbig - weight * value) / (1.0 - weight)
        est = abs(extrapolated - vbig)
        value, iters = extrapolated, iters + ibig
    out = CapacityValue(float(value), "homogeneous", grid.h, grid.extent, est, raw, iters)
    if keep_field:
        out.raw_values["field"] = u
    return out


def bessel_capacity(target, m, grid, rtol=1e-8, keep_field=False):
    """Inhomogeneous (full Sobolev-energy) capacity, the order-2m surrogate."""
    mask = _target_mask(target, grid)
    if mask.empty:
        return CapacityValue(0.0, "inhomogeneous", grid.h, grid.extent)
    pts = mask.points()
    if np.abs(pts).max() > grid.box_radius - 2 * m * grid.h:
        raise InputError("target set reaches the box boundary; enlarge the extent")
    value, iters, u = _one_box_capacity("inhomogeneous_m", m, grid, mask, rtol)
    out = CapacityValue(float(value), "inhomogeneous", grid.h, grid.extent, float("nan"),
                        {f"extent_{grid.extent}": value}, iters)
    if keep_field:
        out.raw_values["field"] = u
    return out


def exact_ball_capacity(m, n, radius):
    """Closed-form cap_m of a centered ball (test oracle)."""
    from .radial import ball_potential_exact

    return ball_potential_exact(m, n, radius)[2]


@dataclass
class AnnulusCapacitySeries:
    """Per-scale capacities of closed ball slices of a complement region.

    terms[j] holds (rho, capacity, weight rho^(2m-n), ball_capacity) where
    ball_capacity is the same-pipeline capacity of the full ball of radius
    rho, the natural normalizer for classifier thresholds.
    """

    m: int
    n: int
    j_range: tuple
    rho: list
    capacity: list
    ball_capacity: list
    kind: str
    metadata: dict = field(default_factory=dict)

    def weighted_terms(self):
        w = []
        for rho, c in zip(self.rho, self.capacity):
            w.append(c * rho ** (2 * self.m - self.n))
        return np.array(w)

    def normalized_terms(self):
        out = []
        for c, b in zip(self.capacity, self.ball_capacity):
            out.append(c / b if b > 0 else 0.0)
        return np.array(out)

    def partial_sums(self):
        return np.cumsum(self.weighted_terms())

    def rows(self):
        ws = self.weighted_terms()
        ps = np.cumsum(ws)
        return [
            (j, rho, cap, w, s)
            for j, rho, cap, w, s in zip(
                range(self.j_range[0], self.j_range[1] + 1), self.rho, self.capacity, ws, ps
            )
        ]


def annulus_series(complement, m, n, j_range=(0, 8), backend="auto",
                   nodes_per_rho=12, box_factor=3.0, kind=None, rho_list=None,
                   jobs=1):
    """Capacities of B_rho \\ Omega at dyadic scales rho = 2^-j.

    `complement` is the Region describing the closed complement of the domain;
    each scale is computed on its own grid with a fixed node count per rho,
    which dilation invariance of the homogeneous capacity makes exact in the
    continuum.  backend "axisym" restricts to bodies of revolution but covers
    every dimension the classifier needs; "cartesian" is the general path.
    For n = 2m the inhomogeneous surrogate is used on one global grid whose
    outer box stays at unit scale, since the borderline capacity is not
    dilation invariant.  rho_list overrides the dyadic 2^-j scales.
    """
    j0, j1 = j_range
    if rho_list is not None:
        rho_values = [float(v) for v in rho_list]
        j_range = (0, len(rho_values) - 1)
    else:
        if j1 < j0:
            raise InputError("empty scale range")
        rho_values = [2.0 ** (-j) for j in range(j0, j1 + 1)]
    if any(b >= a for a, b in zip(rho_values, rho_values[1:])):
        raise InputError("scales must be strictly decreasing")
    if kind is None:
        kind = "inhomogeneous" if n == 2 * m else "homogeneous"
    rhos, caps, balls = [], [], []
    meta = {"backend": backend, "nodes_per_rho": nodes_per_rho, "box_factor": box_factor,
            "node_counts": []}

    if n == 2 * m:
        # one global grid, box at the unit scale, resolve the finest scale
        h = min(rho_values) / max(4, nodes_per_rho // 2)
        extent = int(round(2.0 * max(rho_values) / h))
        grid = Grid(n, h, extent)
        for rho in rho_values:
            slab = Intersection((complement, Ball(rho)))
            mask = slab.mask(grid)
            meta["node_counts"].append(mask.count)
            cv = bessel_capacity(mask, m, grid) if not mask.empty else CapacityValue(
                0.0, "inhomogeneous", h, extent)
            bv = bessel_capacity(Ball(rho).mask(grid), m, grid)
            rhos.append(rho)
            caps.append(cv.value)
            balls.append(bv.value)
        return AnnulusCapacitySeries(m, n, j_range, rhos, caps, balls, kind, meta)

    use_axisym = backend == "axisym" or (
        backend == "auto" and n >= 3 and m <= 2 and is_axisymmetric(complement, n)
    )
    if backend == "axisym" and not is_axisymmetric(complement, n):
        raise InputError("the axisymmetric backend needs a body of revolution about the last axis")
    if use_axisym and m > 2:
        raise UnsupportedRegimeError("axisymmetric backend supports m <= 2")
    if not use_axisym:
        extent = int(round(box_factor * nodes_per_rho))
        if (2 * extent + 1) ** n > 3_000_000:
            raise UnsupportedRegimeError(
                f"per-scale Cartesian grid would have {(2*extent+1)**n} nodes; "
                "reduce nodes_per_rho or use the axisymmetric backend"
            )
    meta["backend"] = "axisym" if use_axisym else "cartesian"
    meta["resolved"] = []

    def _resolvable(region, rho, h):
        # a cusp thinner than the spacing rasterizes to the bare axis needle;
        # such scales are recorded as truncated rather than trusted
        if isinstance(region, Cusp):
            return bool(region.profile(min(rho, region.height)) >= h)
        if isinstance(region, (Union, Intersection)):
            return all(_resolvable(p, rho, h) for p in region.parts)
        return True

    def one_scale(rho):
        h = rho / nodes_per_rho
        slab = Intersection((complement, Ball(rho)))
        if use_axisym:
            cap, ag, _ = axisym_capacity(slab, m, n, h, box_factor * rho)
            bcap, _, _ = axisym_capacity(Ball(rho), m, n, h, box_factor * rho)
            count = int(np.prod(ag.shape))
        else:
            extent = int(round(box_factor * nodes_per_rho))
            grid = Grid(n, h, extent)
            mask = slab.mask(grid)
            count = mask.count
            cap = cap_m(mask, m, grid).value if not mask.empty else 0.0
            bcap = cap_m(Ball(rho).mask(grid), m, grid).value
        return _resolvable(complement, rho, h), count, cap, bcap

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            results = list(pool.map(one_scale, rho_values))
    else:
        results = [one_scale(rho) for rho in rho_values]
    for rho, (resolved, count, cap, bcap) in zip(rho_values, results):
        meta["resolved"].append(resolved)
        meta["node_counts"].append(count)
        rhos.append(rho)
        caps.append(cap)
        balls.append(bcap)
    return AnnulusCapacitySeries(m, n, j_range, rhos, caps, balls, kind, meta)


def series_to_csv(series, path):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "rho", "capacity", "weighted_term", "partial_sum"])
        for row in series.rows():
            w.writerow([row[0]] + [f"{v:.17g}" for v in row[1:]])
