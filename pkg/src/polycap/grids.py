"""Uniform Cartesian grids, geometric regions, and node masks.

A Grid covers the box [-extent*h, extent*h]^n with nodes at integer multiples
of h; grid functions are ndarrays of shape grid.shape and are understood to
continue by zero outside the box.  Regions are geometric predicates that can
be rasterized to a Mask on any grid, which is what lets capacities be
recomputed across per-scale grids and box sizes.
"""

import csv as _csv
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-extent*h, extent*h]^n with spacing h."""

    n: int
    h: float
    extent: int

    def __post_init__(self):
        if self.h <= 0:
            raise InputError("grid spacing must be positive")
        if self.extent < 1:
            raise InputError("grid extent must be at least 1")

    @property
    def shape(self):
        return (2 * self.extent + 1,) * self.n

    @property
    def size(self):
        return (2 * self.extent + 1) ** self.n

    @property
    def box_radius(self):
        return self.extent * self.h

    def axis_coords(self):
        return self.h * np.arange(-self.extent, self.extent + 1)

    def coords(self):
        """Node coordinates, shape grid.shape + (n,)."""
        ax = self.axis_coords()
        mesh = np.meshgrid(*([ax] * self.n), indexing="ij")
        return np.stack(mesh, axis=-1)

    def radii(self):
        """Euclidean distance of every node from the origin."""
        ax = self.axis_coords()
        r2 = np.zeros(self.shape)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = len(ax)
            r2 = r2 + (ax**2).reshape(shape)
        return np.sqrt(r2)

    def zeros(self):
        return np.zeros(self.shape)

    def origin_index(self):
        return (self.extent,) * self.n


class Mask:
    """A set of grid nodes (a compact set K or a closed complement)."""

    def __init__(self, grid, where, region=None):
        where = np.asarray(where, dtype=bool)
        if where.shape != grid.shape:
            raise InputError("mask shape does not match the grid")
        self.grid = grid
        self.where = where
        self.region = region

    @property
    def count(self):
        return int(self.where.sum())

    @property
    def empty(self):
        return not self.where.any()

    def points(self):
        return self.grid.coords()[self.where]

    def __or__(self, other):
        if other.grid != self.grid:
            raise InputError("masks live on different grids")
        return Mask(self.grid, self.where | other.where)

    def __and__(self, other):
        if other.grid != self.grid:
            raise InputError("masks live on different grids")
        return Mask(self.grid, self.where & other.where)

    def issubset(self, other):
        return bool(np.all(~self.where | other.where))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow([f"x{i+1}" for i in range(self.grid.n)])
            for p in self.points():
                writer.writerow([f"{v:.17g}" for v in p])


def mask_from_csv(grid, path, tol=1e-9):
    """Load a node-list CSV (one coordinate row per node) as a mask."""
    where = np.zeros(grid.shape, dtype=bool)
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        if len(header) != grid.n:
            raise InputError("node list dimension does not match the grid")
        for row in reader:
            x = np.array([float(v) for v in row])
            idx = np.rint(x / grid.h).astype(int)
            if np.any(np.abs(x - idx * grid.h) > tol * max(grid.h, 1.0)):
                raise InputError(f"point {x} is not a grid node")
            if np.any(np.abs(idx) > grid.extent):
                raise InputError(f"point {x} lies outside the grid box")
            where[tuple(idx + grid.extent)] = True
    return Mask(grid, where)


# -- geometric regions -------------------------------------------------------


class Region:
    """Geometric predicate; subclasses implement contains(points)."""

    def contains(self, points):
        raise NotImplementedError

    def mask(self, grid):
        pts = grid.coords().reshape(-1, grid.n)
        return Mask(grid, self.contains(pts).reshape(grid.shape), region=self)


@dataclass(frozen=True)
class Ball(Region):
    radius: float
    center: tuple = ()

    def contains(self, points):
        c = np.asarray(self.center if self.center else (0.0,) * points.shape[1])
        return np.linalg.norm(points - c, axis=1) <= self.radius + 1e-12


@dataclass(frozen=True)
class Shell(Region):
    """Closed annulus inner <= |x| <= outer."""

    inner: float
    outer: float

    def contains(self, points):
        r = np.linalg.norm(points, axis=1)
        return (r >= self.inner - 1e-12) & (r <= self.outer + 1e-12)


@dataclass(frozen=True)
class Box(Region):
    """Axis-aligned box given by per-axis (lo, hi) bounds."""

    bounds: tuple

    def contains(self, points):
        ok = np.ones(points.shape[0], dtype=bool)
        for axis, (lo, hi) in enumerate(self.bounds):
            ok &= (points[:, axis] >= lo - 1e-12) & (points[:, axis] <= hi + 1e-12)
        return ok


@dataclass(frozen=True)
class Ray(Region):
    """The half-line x_axis <= 0, other coordinates 0 (a segment on any grid)."""

    axis: int = 0
    width: float = 0.0

    def contains(self, points):
        other = np.delete(points, self.axis, axis=1)
        return (points[:, self.axis] <= 1e-12) & (
            np.linalg.norm(other, axis=1) <= self.width + 1e-12
        )


@dataclass(frozen=True)
class Cone(Region):
    """Solid cone around the negative last axis: -x_n >= |x| cos(half_angle)."""

    half_angle: float

    def contains(self, points):
        r = np.linalg.norm(points, axis=1)
        return -points[:, -1] >= r * np.cos(self.half_angle) - 1e-12


@dataclass(frozen=True)
class Cusp(Region):
    """Region 0 <= x_n <= height, |x'| <= f(x_n), opening along +x_n.

    kind "power": f(t) = t**p; kind "exponential": f(t) = exp(-t**(-a)).
    The axis segment itself always belongs to the region, so rasterization
    degrades toward a segment when f drops below the grid spacing (the
    rasterized set is then thinner than the true cusp, never thicker).
    """

    kind: str
    param: float
    height: float = 1.0

    def profile(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            if self.kind == "power":
                return np.where(t > 0, t**self.param, 0.0)
            if self.kind == "exponential":
                return np.where(t > 0, np.exp(-np.power(t, -self.param, where=t > 0)), 0.0)
        raise InputError(f"unknown cusp kind {self.kind!r}")

    def contains(self, points):
        t = points[:, -1]
        width = self.profile(np.maximum(t, 0.0))
        inside = (t >= -1e-12) & (t <= self.height + 1e-12)
        other = points[:, :-1]
        return inside & (np.linalg.norm(other, axis=1) <= width + 1e-12)


@dataclass(frozen=True)
class Union(Region):
    parts: tuple

    def contains(self, points):
        ok = np.zeros(points.shape[0], dtype=bool)
        for part in self.parts:
            ok |= part.contains(points)
        return ok


@dataclass(frozen=True)
class Intersection(Region):
    parts: tuple

    def contains(self, points):
        ok = np.ones(points.shape[0], dtype=bool)
        for part in self.parts:
            ok &= part.contains(points)
        return ok


def region_from_dict(data):
    """Region described in a run-configuration file."""
    kind = data.get("kind")
    if kind == "ball":
        return Ball(float(data["radius"]), tuple(data.get("center", ())))
    if kind == "shell":
        return Shell(float(data["inner"]), float(data["outer"]))
    if kind == "box":
        return Box(tuple(tuple(b) for b in data["bounds"]))
    if kind == "ray":
        return Ray(int(data.get("axis", 0)), float(data.get("width", 0.0)))
    if kind == "cone":
        return Cone(np.deg2rad(float(data["half_angle_deg"])))
    if kind == "cusp":
        return Cusp(data["cusp_kind"], float(data["param"]), float(data.get("height", 1.0)))
    if kind == "union":
        return Union(tuple(region_from_dict(p) for p in data["parts"]))
    if kind == "intersection":
        return Intersection(tuple(region_from_dict(p) for p in data["parts"]))
    raise InputError(f"unknown region kind {kind!r}")
