"""Neumann signal equation ``(lambda - d3 Lap) w = k u + l v`` on the box grid."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import Grid, ModelParams


class EllipticSolveError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _axis_laplacian(n: int, h: float) -> sp.csr_matrix:
    # Reflected ghost node: boundary rows read 2(u_1 - u_0)/h^2.
    main = np.full(n, -2.0)
    upper = np.ones(n - 1)
    lower = np.ones(n - 1)
    upper[0] = 2.0
    lower[-1] = 2.0
    return sp.diags([lower, main, upper], [-1, 0, 1], format="csr") / h ** 2


@lru_cache(maxsize=16)
def neumann_laplacian(grid: Grid) -> sp.csr_matrix:
    """Second-order vertex-centred Neumann Laplacian acting on ``u.ravel()``."""
    mats = [_axis_laplacian(n, h) for n, h in zip(grid.counts, grid.spacing)]
    if grid.dim == 1:
        return mats[0].tocsr()
    nx, ny = grid.counts
    return (sp.kron(mats[0], sp.identity(ny)) + sp.kron(sp.identity(nx), mats[1])).tocsr()


class EllipticOperator:
    """Assembled and factorised ``lambda I - d3 Lap_N``.

    The matrix itself is not symmetric (boundary rows carry the ghost-node
    factor 2) but ``diag(weights) @ matrix`` is, with weights the trapezoid
    control volumes; rows sum to ``lam``.
    """

    def __init__(self, grid: Grid, d3: float, lam: float):
        if not lam > 0:
            raise ValueError("lambda must be > 0")
        self.grid = grid
        self.d3 = d3
        self.lam = lam
        n = int(np.prod(grid.shape))
        self.matrix = (lam * sp.identity(n, format="csr") - d3 * neumann_laplacian(grid)).tocsc()
        self._lu = spla.splu(self.matrix)

    def apply(self, w: np.ndarray) -> np.ndarray:
        return (self.matrix @ w.ravel()).reshape(self.grid.shape)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.ascontiguousarray(rhs, dtype=float).ravel()).reshape(self.grid.shape)


@lru_cache(maxsize=16)
def elliptic_operator(grid: Grid, d3: float, lam: float) -> EllipticOperator:
    return EllipticOperator(grid, d3, lam)


def _source(u, v, params):
    return params.k * np.asarray(u, dtype=float) + params.l * np.asarray(v, dtype=float)


def residual_norm(op: EllipticOperator, u, v, w, params: ModelParams) -> float:
    """``||A w - (k u + l v)||_inf / max(1, ||k u + l v||_inf)``."""
    f = _source(u, v, params)
    r = op.apply(np.asarray(w, dtype=float)) - f
    return float(np.max(np.abs(r)) / max(1.0, float(np.max(np.abs(f)))))


def solve_w(op: EllipticOperator, u, v, params: ModelParams, rtol: float = 1e-10) -> np.ndarray:
    f = _source(u, v, params)
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite source in elliptic solve")
    w = op.solve(f)
    res = residual_norm(op, u, v, w, params)
    if not res <= rtol:
        # one round of iterative refinement before giving up
        w = w + op.solve(f - op.apply(w))
        res = residual_norm(op, u, v, w, params)
        if not res <= rtol:
            raise EllipticSolveError("elliptic solve did not reach tolerance", res)
    return w
