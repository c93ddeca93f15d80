"""Reference eigenpairs of the discretized Hamiltonian and the spectral gap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .hamiltonian import HamiltonianOperator
from .modes import ModeSet


class EigensolverError(RuntimeError):
    """Iterative eigensolver failed to converge."""


@dataclass(frozen=True)
class EigenSystem:
    """Lowest eigenpairs, nondecreasing, orthonormal under the grid inner product."""

    eigenvalues: np.ndarray
    modes: ModeSet
    residual_norms: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        res = np.asarray(self.residual_norms, dtype=float)
        res.setflags(write=False)
        object.__setattr__(self, "residual_norms", res)

    @property
    def count(self) -> int:
        return self.eigenvalues.size


def reference_eigenpairs(H: HamiltonianOperator, count: int) -> EigenSystem:
    """First ``count`` eigenpairs of H, sorted nondecreasing.

    Dense symmetric decomposition at desk scale; Lanczos-type iteration
    (ARPACK) behind a matrix-free operator beyond the dense limit.
    Eigenvectors are normalized in the weighted inner product and sign-fixed
    so the entry of largest magnitude is positive.
    """
    n = H.node_count
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    if n <= H.dense_limit:
        vals, vecs = scipy.linalg.eigh(H.materialize_dense())
        vals, vecs = vals[:count], vecs[:, :count]
    else:
        if count >= n:
            raise ValueError("full spectrum beyond the dense limit is not supported")
        op = scipy.sparse.linalg.LinearOperator((n, n), matvec=H.apply_array, dtype=float)
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(op, k=count, which="SA")
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            got = 0 if exc.eigenvalues is None else len(exc.eigenvalues)
            raise EigensolverError(
                f"iterative eigensolver converged only {got}/{count} pairs"
            ) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]

    w = H.grid.cell_volume
    vecs = vecs / np.sqrt(w)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            vecs[:, j] = -col

    residuals = H.apply_array(vecs) - vecs * vals[None, :]
    res_norms = np.sqrt(w * (residuals**2).sum(axis=0))
    return EigenSystem(vals, ModeSet(H.grid, vecs), res_norms)


def spectral_gap(eigs: EigenSystem, N: int) -> float:
    """lambda_{N+1} - lambda_N, the gap both convergence claims assume positive."""
    if N < 1:
        raise ValueError("N must be positive")
    if eigs.count < N + 1:
        raise ValueError(f"need at least {N + 1} eigenpairs, have {eigs.count}")
    return float(eigs.eigenvalues[N] - eigs.eigenvalues[N - 1])
