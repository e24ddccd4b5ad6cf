"""Uniform (rho, z) grids, scalar/matrix fields and second-order stencils.

All fields hold complex values on an ``(n_rho, n_z)`` node array; matrix
fields carry a trailing ``(2, 2)`` block per node.  Derivatives use centered
differences in the interior and second-order one-sided formulas on the
boundary rows/columns, so any residual built from them should be measured
with :func:`interior_max_norm` and a margin of at least two nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Literal

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import (
    AxisViolation,
    DegenerateGrid,
    EmptyInterior,
    GridMismatch,
    PathOffGrid,
    SingularMatrix,
)

MIN_NODES = 9
DET_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Grid:
    rho_min: float
    rho_max: float
    z_min: float
    z_max: float
    n_rho: int
    n_z: int

    def __post_init__(self):
        if not self.rho_min > 0:
            raise AxisViolation(f"rho_min must be > 0 (axis excluded), got {self.rho_min}")
        if self.n_rho < MIN_NODES or self.n_z < MIN_NODES:
            raise DegenerateGrid(
                f"need at least {MIN_NODES} nodes per axis, got {self.n_rho}x{self.n_z}"
            )
        if not (self.rho_max > self.rho_min and self.z_max > self.z_min):
            raise DegenerateGrid("empty coordinate range")

    @property
    def h_rho(self) -> float:
        return (self.rho_max - self.rho_min) / (self.n_rho - 1)

    @property
    def h_z(self) -> float:
        return (self.z_max - self.z_min) / (self.n_z - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rho, self.n_z)

    @property
    def rho(self) -> np.ndarray:
        return np.linspace(self.rho_min, self.rho_max, self.n_rho)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_z)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as two ``(n_rho, n_z)`` arrays."""
        return np.meshgrid(self.rho, self.z, indexing="ij")

    def refined(self, factor: int = 2) -> "Grid":
        """Same box with ``factor`` times as many intervals per axis."""
        return Grid(
            self.rho_min, self.rho_max, self.z_min, self.z_max,
            factor * (self.n_rho - 1) + 1, factor * (self.n_z - 1) + 1,
        )

    def default_base(self) -> tuple[int, int]:
        # Fixed physical point (10% in from the lower-left corner) so that
        # integration constants coincide on a grid and its refinements.
        return ((self.n_rho - 1) // 10, (self.n_z - 1) // 10)

    def contains(self, node) -> bool:
        i, j = node
        return 0 <= i < self.n_rho and 0 <= j < self.n_z


def make_grid(bounds, counts) -> Grid:
    """Build a grid from ``((rho_min, rho_max), (z_min, z_max))`` and ``(n_rho, n_z)``."""
    (rho_min, rho_max), (z_min, z_max) = bounds
    n_rho, n_z = counts
    return Grid(float(rho_min), float(rho_max), float(z_min), float(z_max), int(n_rho), int(n_z))


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid
    values: np.ndarray

    _trailing: ClassVar[tuple] = ()
    # let ndarray operands defer to the reflected operators below
    __array_ufunc__ = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        expected = self.grid.shape + self._trailing
        if vals.shape != expected:
            raise GridMismatch(f"value array has shape {vals.shape}, expected {expected}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def _new(self, values):
        return type(self)(self.grid, values)

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatch("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self._new(self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self._new(self.values - other.values)
        return NotImplemented

    def __neg__(self):
        return self._new(-self.values)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            w = other.values.reshape(other.values.shape + (1,) * len(self._trailing))
            return self._new(self.values * w)
        if np.isscalar(other):
            return self._new(self.values * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScalarField):
            return self * other._new(1.0 / other.values)
        if np.isscalar(other):
            return self._new(self.values / other)
        return NotImplemented

    @property
    def real(self):
        return self._new(self.values.real)

    @property
    def imag(self):
        return self._new(self.values.imag)


@dataclass(frozen=True, eq=False)
class ScalarField(Field):
    _trailing: ClassVar[tuple] = ()

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        r, z = grid.mesh()
        return cls(grid, np.broadcast_to(fn(r, z), grid.shape))

    def __mul__(self, other):
        if isinstance(other, MatrixField):
            return other * self
        return super().__mul__(other)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class MatrixField(Field):
    _trailing: ClassVar[tuple] = (2, 2)

    @classmethod
    def constant(cls, grid: Grid, matrix) -> "MatrixField":
        m = np.asarray(matrix, dtype=complex).reshape(2, 2)
        return cls(grid, np.broadcast_to(m, grid.shape + (2, 2)))

    @classmethod
    def zeros(cls, grid: Grid) -> "MatrixField":
        return cls(grid, np.zeros(grid.shape + (2, 2), dtype=complex))

    @classmethod
    def identity(cls, grid: Grid) -> "MatrixField":
        return cls.constant(grid, np.eye(2))

    def __matmul__(self, other):
        if isinstance(other, MatrixField):
            self._check(other)
            return MatrixField(self.grid, self.values @ other.values)
        if isinstance(other, np.ndarray) and other.shape == (2, 2):
            return MatrixField(self.grid, self.values @ other)
        return NotImplemented

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray) and other.shape == (2, 2):
            return MatrixField(self.grid, other @ self.values)
        return NotImplemented

    @property
    def T(self) -> "MatrixField":
        return MatrixField(self.grid, np.swapaxes(self.values, -1, -2))

    def entry(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.values[..., i, j])

    def trace(self) -> ScalarField:
        return ScalarField(self.grid, self.values[..., 0, 0] + self.values[..., 1, 1])

    def det(self) -> ScalarField:
        v = self.values
        return ScalarField(self.grid, v[..., 0, 0] * v[..., 1, 1] - v[..., 0, 1] * v[..., 1, 0])

    def inv(self, threshold: float = DET_THRESHOLD) -> "MatrixField":
        """Closed-form adjugate inverse; refuses nodes with ``|det| < threshold``."""
        v = self.values
        det = self.det().values
        bad = np.abs(det) < threshold
        if bad.any():
            node = tuple(int(k) for k in np.argwhere(bad)[0])
            raise SingularMatrix(f"|det| < {threshold:g} at node {node}", node=node)
        adj = np.empty_like(v)
        adj[..., 0, 0] = v[..., 1, 1]
        adj[..., 1, 1] = v[..., 0, 0]
        adj[..., 0, 1] = -v[..., 0, 1]
        adj[..., 1, 0] = -v[..., 1, 0]
        return MatrixField(self.grid, adj / det[..., None, None])


def matrix_unit(i: int, j: int) -> np.ndarray:
    """The 2x2 matrix unit E_ij (1-based indices, as in E_12)."""
    m = np.zeros((2, 2), dtype=complex)
    m[i - 1, j - 1] = 1.0
    return m


def commute(a: MatrixField, b: MatrixField) -> MatrixField:
    return a @ b - b @ a


def coordinate_fields(grid: Grid) -> tuple[ScalarField, ScalarField]:
    r, z = grid.mesh()
    return ScalarField(grid, r), ScalarField(grid, z)


# ---------------------------------------------------------------------------
# derivatives


def _diff(f: Field, axis: int, h: float) -> Field:
    return f._new(np.gradient(f.values, h, axis=axis, edge_order=2))


def partial_rho(f: Field) -> Field:
    return _diff(f, 0, f.grid.h_rho)


def partial_z(f: Field) -> Field:
    return _diff(f, 1, f.grid.h_z)


# ---------------------------------------------------------------------------
# norms


def interior_slice(grid: Grid, margin: int = 2) -> tuple[slice, slice]:
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if margin > grid.n_rho - 1 - margin or margin > grid.n_z - 1 - margin:
        raise EmptyInterior(f"margin {margin} leaves no interior nodes on {grid.n_rho}x{grid.n_z}")
    return (slice(margin, grid.n_rho - margin), slice(margin, grid.n_z - margin))


def node_norms(f: Field) -> np.ndarray:
    """Per-node Frobenius norm (absolute value for scalar fields)."""
    v = f.values
    if v.ndim == 2:
        return np.abs(v)
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=(-2, -1)))


def interior_max_norm(f: Field, margin: int = 2) -> float:
    """Max Frobenius norm over nodes at least ``margin`` nodes from every edge."""
    sl = interior_slice(f.grid, margin)
    return float(node_norms(f)[sl].max())


# ---------------------------------------------------------------------------
# path integration

PathKind = Literal["rho-then-z", "z-then-rho"]


@dataclass(frozen=True)
class GridPath:
    start: tuple[int, int]
    end: tuple[int, int]
    kind: PathKind = "rho-then-z"

    def nodes(self) -> list[tuple[int, int]]:
        (i0, j0), (i1, j1) = self.start, self.end
        si = 1 if i1 >= i0 else -1
        sj = 1 if j1 >= j0 else -1
        if self.kind == "rho-then-z":
            first = [(i, j0) for i in range(i0, i1 + si, si)]
            second = [(i1, j) for j in range(j0 + sj, j1 + sj, sj)] if j1 != j0 else []
        elif self.kind == "z-then-rho":
            first = [(i0, j) for j in range(j0, j1 + sj, sj)]
            second = [(i, j1) for i in range(i0 + si, i1 + si, si)] if i1 != i0 else []
        else:
            raise ValueError(f"unknown path kind {self.kind!r}")
        return first + second


@dataclass(frozen=True)
class PathIntegral:
    nodes: np.ndarray   # (k, 2) node indices in traversal order
    values: np.ndarray  # (k, 2, 2) accumulated matrices


def _leg_increments(comp: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid increments between consecutive samples of a 1-D leg."""
    return 0.5 * h * (comp[1:] + comp[:-1])


def path_integrate(sigma, path: GridPath, initial=None) -> PathIntegral:
    """Trapezoid integral of a matrix 1-form along an axis-aligned grid path.

    The rho-component is integrated on rho legs and the z-component on z legs.
    Returned values are ``initial`` plus the running integral at every node.
    """
    grid = sigma.rho.grid
    for node in (path.start, path.end):
        if not grid.contains(node):
            raise PathOffGrid(f"node {node} is outside the {grid.n_rho}x{grid.n_z} grid")
    nodes = path.nodes()
    init = np.zeros((2, 2), dtype=complex) if initial is None else np.asarray(initial, dtype=complex)
    out = np.empty((len(nodes), 2, 2), dtype=complex)
    out[0] = init
    acc = init.copy()
    for k in range(1, len(nodes)):
        (ia, ja), (ib, jb) = nodes[k - 1], nodes[k]
        if ja == jb:
            comp, h = sigma.rho.values, grid.h_rho * (ib - ia)
        else:
            comp, h = sigma.z.values, grid.h_z * (jb - ja)
        acc = acc + 0.5 * h * (comp[ia, ja] + comp[ib, jb])
        out[k] = acc
    return PathIntegral(np.asarray(nodes, dtype=int), out)


def _cumulative_from(values: np.ndarray, h: float, axis: int, k0: int) -> np.ndarray:
    c = cumulative_trapezoid(values, dx=h, axis=axis, initial=0.0)
    ref = np.take(c, [k0], axis=axis)
    return c - ref


def integrate_from_base(sigma, base=None, kind: PathKind = "rho-then-z", initial=None) -> MatrixField:
    """Integrate a 1-form from ``base`` to every node along one path kind.

    Equivalent to calling :func:`path_integrate` with ``GridPath(base, node,
    kind)`` for every node, but vectorized.
    """
    grid = sigma.rho.grid
    base = grid.default_base() if base is None else tuple(base)
    if not grid.contains(base):
        raise PathOffGrid(f"base node {base} is outside the grid")
    i0, j0 = base
    init = np.zeros((2, 2), dtype=complex) if initial is None else np.asarray(initial, dtype=complex)
    fr, fz = sigma.rho.values, sigma.z.values
    if kind == "rho-then-z":
        row = _cumulative_from(fr[:, j0], grid.h_rho, 0, i0)  # (n_rho, 2, 2)
        cols = _cumulative_from(fz, grid.h_z, 1, j0)
        out = row[:, None] + cols
    elif kind == "z-then-rho":
        col = _cumulative_from(fz[i0, :], grid.h_z, 0, j0)  # (n_z, 2, 2)
        rows = _cumulative_from(fr, grid.h_rho, 0, i0)
        out = col[None, :] + rows
    else:
        raise ValueError(f"unknown path kind {kind!r}")
    return MatrixField(grid, out + init)


def random_trig_field(grid: Grid, rng: np.random.Generator, order: int = 2,
                      real: bool = False) -> MatrixField:
    """Smooth random matrix field: low-order trigonometric polynomial per entry."""
    r, z = grid.mesh()
    vals = np.zeros(grid.shape + (2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            for p in range(order + 1):
                for q in range(order + 1):
                    amp = rng.normal() if real else rng.normal() + 1j * rng.normal()
                    phase = rng.uniform(0, 2 * np.pi)
                    vals[..., a, b] += amp * np.cos(p * r + q * z + phase) / (1 + p + q)
    return MatrixField(grid, vals)
