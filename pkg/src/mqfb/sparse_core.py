"""Symmetric sparse matrices, block extraction and SPD solves.

Matrices are plain ``scipy.sparse`` CSR/CSC arrays; this module adds the
operations the filter-bank pipeline needs on top of them: principal-block
extraction by vertex subset, assembly of the block-diagonal inner-product
matrix, and a positive-definite solver with a direct (sparse LU in symmetric
mode) default and a conjugate-gradient fallback.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class EmptyBlock(ValueError):
    """Requested principal block over an empty vertex subset."""


class NotPositiveDefinite(ValueError):
    """Factorization detected that the matrix is not positive definite."""


def check_symmetric(m, tol=0.0):
    """Return True if the sparse matrix equals its transpose within tol."""
    d = m - m.T
    if d.nnz == 0:
        return True
    return np.max(np.abs(d.data)) <= tol


def spmv(m, x):
    """Sparse matrix-vector (or matrix-matrix) product with a dim check."""
    x = np.asarray(x)
    if x.shape[0] != m.shape[1]:
        raise ValueError(f"dimension mismatch: {m.shape} @ {x.shape}")
    return m @ x


def extract_principal_block(m, s):
    """Principal submatrix of ``m`` over vertex subset ``s``.

    Indices inside the block follow ascending original vertex id.
    """
    s = np.asarray(s, dtype=np.int64)
    if s.size == 0:
        raise EmptyBlock("principal block requested for empty vertex subset")
    s = np.sort(s)
    return sp.csr_array(m.tocsr()[np.ix_(s, s)])


def build_block_diag_q(m, partition):
    """Block-diagonal inner-product matrix for a bipartition.

    Keeps the within-A and within-B entries of ``m`` and zeroes every
    cross entry, leaving vertices in their original order.
    """
    f = np.asarray(partition.f, dtype=np.float64)
    coo = sp.coo_array(m)
    keep = f[coo.row] == f[coo.col]
    q = sp.coo_array(
        (coo.data[keep], (coo.row[keep], coo.col[keep])), shape=m.shape
    )
    return sp.csr_array(q)


def _is_diagonal(m):
    coo = sp.coo_array(m)
    return np.all(coo.row == coo.col)


class SpdSolver:
    """Solver for S z = y with S symmetric positive definite.

    mode "direct" factorizes once with sparse LU in symmetric mode and
    checks positive definiteness from the signs of the U diagonal; mode
    "cg" runs conjugate gradient to the requested relative residual.
    Diagonal matrices take a fast reciprocal path in either mode.
    """

    def __init__(self, matrix, mode="direct", tol=1e-10):
        matrix = sp.csc_array(matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError("matrix must be square")
        self.matrix = matrix
        self.mode = mode
        self.tol = tol
        self.n = matrix.shape[0]
        self._diag = None
        self._lu = None
        if _is_diagonal(matrix):
            d = matrix.diagonal()
            if np.any(d <= 0):
                raise NotPositiveDefinite("nonpositive diagonal entry")
            self._diag = d
        elif mode == "direct":
            try:
                lu = spla.splu(
                    matrix,
                    diag_pivot_thresh=0.0,
                    permc_spec="MMD_AT_PLUS_A",
                    options=dict(SymmetricMode=True),
                )
            except RuntimeError as e:
                raise NotPositiveDefinite(str(e)) from e
            du = lu.U.diagonal()
            # a singular PSD matrix factors with a roundoff-scale pivot
            if (np.any(du <= 0) or not np.all(np.isfinite(du))
                    or np.min(du) <= 1e-13 * np.max(du)):
                raise NotPositiveDefinite(
                    "LU factor has nonpositive or vanishing pivot"
                )
            self._lu = lu
        elif mode != "cg":
            raise ValueError(f"unknown solver mode {mode!r}")

    def solve(self, y):
        """Solve S z = y; y may be a vector or an (n, k) block of RHSs."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape[0] != self.n:
            raise ValueError(f"rhs has dim {y.shape[0]}, expected {self.n}")
        if self._diag is not None:
            return (y.T / self._diag).T
        if self._lu is not None:
            return self._lu.solve(y)
        return self._solve_cg(y)

    def _solve_cg(self, y):
        def one(rhs):
            z, info = spla.cg(self.matrix, rhs, rtol=self.tol, atol=0.0)
            if info != 0:
                raise NotPositiveDefinite(f"cg failed to converge (info={info})")
            return z

        if y.ndim == 1:
            return one(y)
        return np.column_stack([one(y[:, j]) for j in range(y.shape[1])])


def spd_solve(solver, y):
    return solver.solve(y)


def save_matrix_market(path, m):
    """Write a symmetric sparse matrix in Matrix Market coordinate format."""
    from scipy.io import mmwrite

    mmwrite(path, sp.coo_matrix(m), symmetry="symmetric")


def load_matrix_market(path):
    from scipy.io import mmread

    return sp.csr_array(mmread(path))


def save_vector(path, x, fmt="bin"):
    """Dense vector as little-endian float64 binary or CSV."""
    x = np.asarray(x, dtype="<f8")
    if fmt == "bin":
        x.tofile(path)
    elif fmt == "csv":
        np.savetxt(path, x, delimiter=",")
    else:
        raise ValueError(f"unknown vector format {fmt!r}")


def load_vector(path, fmt="bin"):
    if fmt == "bin":
        return np.fromfile(path, dtype="<f8")
    if fmt == "csv":
        return np.loadtxt(path, delimiter=",")
    raise ValueError(f"unknown vector format {fmt!r}")
