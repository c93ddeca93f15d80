"""Discretized Schrodinger operator: -1/2 Laplacian + pointwise potential.

The Laplacian is the second-order central stencil (3-point in 1D, 5-point
in 2D), applied matrix-free; a dense symmetric matrix can be materialized
at desk scale for the eigensolver and for oracle checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import PERIODIC, DiscreteFunction, Grid, GridMismatchError

DENSE_LIMIT_DEFAULT = 4096


@dataclass(frozen=True)
class FreeParticle:
    """V = 0 everywhere."""

    def values_on(self, grid: Grid) -> np.ndarray:
        return np.zeros(grid.node_count)


@dataclass(frozen=True)
class HarmonicWell:
    """V(x) = 1/2 * omega^2 * |x - center|^2, centered at the box midpoint by default."""

    omega: float = 1.0
    center: tuple[float, ...] | None = None

    def values_on(self, grid: Grid) -> np.ndarray:
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        center = self.center
        if center is None:
            center = tuple(e / 2 for e in grid.extent)
        if len(center) != grid.dim:
            raise ValueError("center dimension does not match grid")
        d2 = ((grid.coordinates() - np.asarray(center)) ** 2).sum(axis=1)
        return 0.5 * self.omega**2 * d2


@dataclass(frozen=True)
class MultiWell:
    """Negative Gaussian bumps of equal depth and width at the given centers.

    V(x) = -depth * sum_c exp(-|x - c|^2 / (2 width^2)).  Spatially separated
    wells give the localized low-energy structure the sparse modes latch onto.
    """

    centers: tuple[tuple[float, ...], ...]
    depth: float
    width: float

    def values_on(self, grid: Grid) -> np.ndarray:
        if self.depth <= 0 or self.width <= 0:
            raise ValueError("depth and width must be positive")
        coords = grid.coordinates()
        v = np.zeros(grid.node_count)
        for c in self.centers:
            if len(c) != grid.dim:
                raise ValueError("well center dimension does not match grid")
            d2 = ((coords - np.asarray(c)) ** 2).sum(axis=1)
            v -= self.depth * np.exp(-d2 / (2.0 * self.width**2))
        return v


@dataclass(frozen=True)
class Tabulated:
    """Potential given by one value per node (e.g. loaded from a CSV column)."""

    values: tuple[float, ...]

    def values_on(self, grid: Grid) -> np.ndarray:
        v = np.asarray(self.values, dtype=float)
        if v.size != grid.node_count:
            raise ValueError(
                f"tabulated potential has {v.size} values, grid has {grid.node_count} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("tabulated potential contains non-finite values")
        return v


Potential = FreeParticle | HarmonicWell | MultiWell | Tabulated


class HamiltonianOperator:
    """Symmetric operator -1/2 Laplacian + V on one grid.

    ``apply`` is matrix-free and reentrant; ``materialize_dense`` builds the
    symmetric matrix once (cached) when the node count is small enough.
    """

    def __init__(self, grid: Grid, potential: Potential, dense_limit: int = DENSE_LIMIT_DEFAULT):
        self.grid = grid
        self.potential = potential
        self.dense_limit = int(dense_limit)
        self.potential_values = potential.values_on(grid)
        self.potential_values.setflags(write=False)
        self._dense: np.ndarray | None = None

    @property
    def node_count(self) -> int:
        return self.grid.node_count

    def apply_array(self, x: np.ndarray) -> np.ndarray:
        """Apply the operator to node values, one column per function."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        cols = x[:, None] if single else x
        if cols.shape[0] != self.node_count:
            raise GridMismatchError("input length does not match grid node count")
        periodic = self.grid.boundary == PERIODIC
        shaped = cols.reshape(self.grid.shape + (cols.shape[1],))
        out = np.zeros_like(shaped)
        for axis in range(self.grid.dim):
            out += _second_difference(shaped, axis, periodic) / self.grid.spacing[axis] ** 2
        out = -0.5 * out.reshape(cols.shape)
        out += self.potential_values[:, None] * cols
        return out[:, 0] if single else out

    def apply(self, u: DiscreteFunction) -> DiscreteFunction:
        if u.grid != self.grid:
            raise GridMismatchError("function lives on a different grid")
        return DiscreteFunction(self.grid, self.apply_array(u.values))

    def materialize_dense(self) -> np.ndarray:
        """Dense symmetric matrix of the operator (exactly symmetrized storage)."""
        if self.node_count > self.dense_limit:
            raise ValueError(
                f"node count {self.node_count} exceeds dense limit {self.dense_limit}; "
                "use the iterative path (matrix-free apply)"
            )
        if self._dense is None:
            mats = [
                _dense_kinetic_1d(n, h, self.grid.boundary == PERIODIC)
                for n, h in zip(self.grid.shape, self.grid.spacing)
            ]
            if self.grid.dim == 1:
                a = mats[0]
            else:
                nx, ny = self.grid.shape
                a = np.kron(mats[0], np.eye(ny)) + np.kron(np.eye(nx), mats[1])
            a[np.diag_indices_from(a)] += self.potential_values
            a = 0.5 * (a + a.T)
            a.setflags(write=False)
            self._dense = a
        return self._dense


def build_hamiltonian(
    grid: Grid, potential: Potential, dense_limit: int = DENSE_LIMIT_DEFAULT
) -> HamiltonianOperator:
    """Assemble the operator, validating tabulated potentials against the grid."""
    return HamiltonianOperator(grid, potential, dense_limit)


def _second_difference(a: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    """u_{i-1} - 2 u_i + u_{i+1} along ``axis`` (implicit zeros outside for Dirichlet)."""
    moved = np.moveaxis(a, axis, 0)
    out = -2.0 * moved
    if periodic:
        out += np.roll(moved, 1, axis=0) + np.roll(moved, -1, axis=0)
    else:
        out[:-1] += moved[1:]
        out[1:] += moved[:-1]
    return np.moveaxis(out, 0, axis)


def _dense_kinetic_1d(n: int, h: float, periodic: bool) -> np.ndarray:
    d = 1.0 / h**2
    off = -0.5 / h**2
    a = np.diag(np.full(n, d)) + np.diag(np.full(n - 1, off), 1) + np.diag(np.full(n - 1, off), -1)
    if periodic:
        a[0, n - 1] += off
        a[n - 1, 0] += off
    return a
