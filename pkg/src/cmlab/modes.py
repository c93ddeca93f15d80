"""Stacks of discrete functions stored column-wise, with orthonormality metadata."""

from __future__ import annotations

import numpy as np

from .grid import DiscreteFunction, Grid, GridMismatchError


class RankDeficientError(ValueError):
    """Mode stack columns are (numerically) linearly dependent."""


class ModeSet:
    """N discrete functions on one grid, stored as an (node_count, N) matrix.

    Construction does not require orthonormality; ``ortho_defect`` reports
    the worst deviation of the weighted Gram matrix from the identity so
    callers can enforce their own feasibility contracts.
    """

    def __init__(self, grid: Grid, matrix: np.ndarray):
        mat = np.array(matrix, dtype=float)
        if mat.ndim == 1:
            mat = mat[:, None]
        if mat.ndim != 2 or mat.shape[0] != grid.node_count:
            raise ValueError(
                f"mode matrix must be (node_count, N); got {mat.shape} for "
                f"{grid.node_count} nodes"
            )
        mat.setflags(write=False)
        self.grid = grid
        self.matrix = mat
        self._gram: np.ndarray | None = None

    @classmethod
    def from_functions(cls, functions) -> "ModeSet":
        functions = list(functions)
        if not functions:
            raise ValueError("need at least one function")
        grid = functions[0].grid
        for f in functions[1:]:
            if f.grid != grid:
                raise GridMismatchError("mode functions live on different grids")
        return cls(grid, np.column_stack([f.values for f in functions]))

    @property
    def count(self) -> int:
        return self.matrix.shape[1]

    @property
    def columns(self) -> list[DiscreteFunction]:
        return [self.column(i) for i in range(self.count)]

    def column(self, i: int) -> DiscreteFunction:
        return DiscreteFunction(self.grid, self.matrix[:, i])

    def gram(self) -> np.ndarray:
        """Weighted Gram matrix of the columns."""
        if self._gram is None:
            g = self.grid.cell_volume * (self.matrix.T @ self.matrix)
            g.setflags(write=False)
            self._gram = g
        return self._gram

    @property
    def ortho_defect(self) -> float:
        """max |<f_i, f_j> - delta_ij| over all column pairs."""
        return float(np.abs(self.gram() - np.eye(self.count)).max())

    def take(self, count: int) -> "ModeSet":
        """First ``count`` columns as a new set."""
        if not 1 <= count <= self.count:
            raise ValueError(f"cannot take {count} of {self.count} modes")
        return ModeSet(self.grid, self.matrix[:, :count])


def orthonormal_columns(matrix: np.ndarray, cell_volume: float) -> np.ndarray:
    """Closest weighted-orthonormal frame to ``matrix`` (polar factor).

    Output spans the same subspace and minimizes the weighted Frobenius
    distance to the input among all orthonormal frames.
    """
    u, s, vt = np.linalg.svd(np.sqrt(cell_volume) * matrix, full_matrices=False)
    if s[-1] <= 0.0 or (s[0] / s[-1]) ** 2 >= 1e12:
        raise RankDeficientError(
            "mode stack is numerically rank deficient (Gram condition >= 1e12)"
        )
    return (u @ vt) / np.sqrt(cell_volume)


def orthonormalize(stack: ModeSet) -> ModeSet:
    """Project a raw mode stack onto the orthonormality constraint set."""
    return ModeSet(stack.grid, orthonormal_columns(stack.matrix, stack.grid.cell_volume))
