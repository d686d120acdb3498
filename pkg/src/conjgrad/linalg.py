"""Dense/CSR primitives, SPD test-problem generators and a direct-solve oracle.

Every reduction in this module runs in a fixed sequential order so that
results are reproducible bit for bit. Vectors are plain 1-D float64 numpy
arrays; matrices are the two frozen containers below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError, InvalidArgument, NonFiniteError, SingularMatrix

SYMMETRY_RTOL = 1e-12
PIVOT_RTOL = 1e-14


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def as_vector(v, name="vector") -> np.ndarray:
    """Validate and return a read-only float64 copy of ``v``."""
    out = np.array(v, dtype=np.float64, copy=True)
    if out.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {out.shape}")
    if out.size < 1:
        raise DimensionError(f"{name} must have length >= 1")
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"{name} has non-finite entries")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Square matrix held as an (n, n) float64 array.

    Symmetry is not enforced on construction: asymmetric inputs must stay
    representable so that the diagnostics can flag them.
    Use :func:`check_symmetry` to test it.
    """

    data: np.ndarray

    def __post_init__(self):
        a = np.array(self.data, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionError(f"DenseMatrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("DenseMatrix has non-finite entries")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def entries(self) -> np.ndarray:
        """Row-major flat view of the n*n entries."""
        return self.data.reshape(-1)

    def to_dense(self) -> np.ndarray:
        return np.array(self.data)

    def to_csr(self) -> "SparseMatrixCSR":
        return SparseMatrixCSR.from_dense(self.data)


@dataclass(frozen=True, eq=False)
class SparseMatrixCSR:
    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        offsets = np.array(self.row_offsets, dtype=np.int64, copy=True)
        cols = np.array(self.col_indices, dtype=np.int64, copy=True)
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if n < 1:
            raise DimensionError("CSR dimension must be >= 1")
        if offsets.shape != (n + 1,):
            raise DimensionError(f"row_offsets must have length n+1={n + 1}")
        nnz = cols.size
        if vals.shape != (nnz,):
            raise DimensionError("values and col_indices differ in length")
        if offsets[0] != 0 or offsets[-1] != nnz or np.any(np.diff(offsets) < 0):
            raise InvalidArgument("row_offsets must start at 0, be non-decreasing, end at nnz")
        if nnz and (cols.min() < 0 or cols.max() >= n):
            raise InvalidArgument("column index out of range")
        for i in range(n):
            row = cols[offsets[i]:offsets[i + 1]]
            if row.size > 1 and np.any(np.diff(row) <= 0):
                raise InvalidArgument(f"column indices in row {i} are not strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteError("CSR matrix has non-finite values")
        for a in (offsets, cols, vals):
            a.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "row_offsets", offsets)
        object.__setattr__(self, "col_indices", cols)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrixCSR":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square array, got shape {a.shape}")
        rows, cols = np.nonzero(a)
        offsets = np.zeros(a.shape[0] + 1, dtype=np.int64)
        np.add.at(offsets, rows + 1, 1)
        return cls(a.shape[0], np.cumsum(offsets), cols, a[rows, cols])

    @classmethod
    def from_coo(cls, n, rows, cols, vals) -> "SparseMatrixCSR":
        """Build from coordinate triples. Duplicates are rejected, not summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size > 1:
            dup = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if np.any(dup):
                k = int(np.argmax(dup))
                raise InvalidArgument(f"duplicate entry at ({rows[k]}, {cols[k]})")
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.add.at(offsets, rows + 1, 1)
        return cls(n, np.cumsum(offsets), cols, vals)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        a[rows, self.col_indices] = self.values
        return a


Matrix = Union[DenseMatrix, SparseMatrixCSR]


@dataclass(frozen=True, eq=False)
class LinearSystem:
    operator: Matrix
    rhs: np.ndarray

    def __post_init__(self):
        rhs = as_vector(self.rhs, "rhs")
        if self.operator.n != rhs.size:
            raise DimensionError(
                f"operator is {self.operator.n}x{self.operator.n} but rhs has length {rhs.size}")
        object.__setattr__(self, "rhs", rhs)

    @property
    def n(self) -> int:
        return self.operator.n


def _check_same_length(u, v):
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"length mismatch: {u.shape} vs {v.shape}")


def dot(u, v) -> float:
    """Inner product summed strictly left to right.

    ``u[k]*v[k] == v[k]*u[k]`` exactly, and the accumulation order does not
    depend on argument order, so ``dot(u, v) == dot(v, u)`` bitwise.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _check_same_length(u, v)
    if u.size == 0:
        return 0.0
    # add.accumulate is a plain sequential scan (no pairwise blocking)
    return float(np.add.accumulate(u * v)[-1])


def norm(v) -> float:
    return math.sqrt(dot(v, v))


def matvec(a: Matrix, v) -> np.ndarray:
    """``a @ v`` with each row summed left to right over its stored columns.

    Zero entries contribute exact zeros, so the dense and CSR backends agree
    bitwise on the same matrix.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or a.n != v.size:
        raise DimensionError(f"matrix is {a.n}x{a.n} but vector has shape {v.shape}")
    if isinstance(a, DenseMatrix):
        return np.add.accumulate(a.data * v, axis=1)[:, -1]
    if isinstance(a, SparseMatrixCSR):
        starts = a.row_offsets[:-1]
        lengths = np.diff(a.row_offsets)
        out = np.zeros(a.n)
        for k in range(int(lengths.max(initial=0))):
            rows = np.nonzero(lengths > k)[0]
            idx = starts[rows] + k
            out[rows] += a.values[idx] * v[a.col_indices[idx]]
        return out
    raise TypeError(f"unsupported operator type {type(a).__name__}")


def axpy(a: float, x, y) -> np.ndarray:
    """Return ``a*x + y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same_length(x, y)
    return a * x + y


def check_symmetry(a: Matrix, rtol: float = SYMMETRY_RTOL) -> bool:
    m = a.to_dense()
    return bool(np.all(np.abs(m - m.T) <= rtol * np.maximum(1.0, np.abs(m))))


def frobenius_norm(a: Matrix) -> float:
    vals = a.data.reshape(-1) if isinstance(a, DenseMatrix) else a.values
    return norm(vals) if vals.size else 0.0


def generate_laplacian_1d(n: int) -> SparseMatrixCSR:
    """Tridiagonal (-1, 2, -1) matrix of order ``n``."""
    if int(n) != n or n < 2:
        raise InvalidArgument(f"laplacian needs n >= 2, got {n}")
    n = int(n)
    i = np.arange(n)
    rows = np.concatenate([i, i[1:], i[:-1]])
    cols = np.concatenate([i, i[:-1], i[1:]])
    vals = np.concatenate([np.full(n, 2.0), np.full(2 * (n - 1), -1.0)])
    return SparseMatrixCSR.from_coo(n, rows, cols, vals)


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    state += 0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)

    All arithmetic is mod 2**64. Doubles take the top 53 bits.
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = int(seed) & self._MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform_array(self, size: int, low=-1.0, high=1.0) -> np.ndarray:
        return np.array([low + (high - low) * self.uniform() for _ in range(size)])


def _orthonormal_columns(m: np.ndarray) -> np.ndarray:
    # modified Gram-Schmidt, two passes for numerical orthogonality
    q = np.array(m, dtype=np.float64)
    n = q.shape[1]
    for j in range(n):
        col = q[:, j].copy()
        for _ in range(2):
            for k in range(j):
                col = axpy(-dot(q[:, k], col), q[:, k], col)
        nrm = norm(col)
        if nrm == 0.0:
            raise SingularMatrix("random matrix is rank deficient; try another seed")
        q[:, j] = col / nrm
    return q


def spd_eigenvalues(n: int, cond_target: float) -> np.ndarray:
    """Eigenvalues geometrically spaced from 1 to ``cond_target``."""
    if n == 1:
        return np.ones(1)
    return np.array([cond_target ** (k / (n - 1)) for k in range(n)])


def generate_random_spd(n: int, seed: int, cond_target: float = 100.0) -> DenseMatrix:
    """Return Q diag(lam) Q^T with lam log-uniform on [1, cond_target].

    Q orthonormalises an n x n matrix of SplitMix64 uniforms on [-1, 1).
    Output is bitwise reproducible for a given (n, seed, cond_target).
    """
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n}")
    if not cond_target >= 1.0 or not math.isfinite(cond_target):
        raise InvalidArgument(f"cond_target must be >= 1, got {cond_target}")
    n = int(n)
    rng = SplitMix64(seed)
    q = _orthonormal_columns(rng.uniform_array(n * n).reshape(n, n))
    lam = spd_eigenvalues(n, cond_target)
    a = np.zeros((n, n))
    for k in range(n):
        a += lam[k] * np.outer(q[:, k], q[:, k])
    # (a + a.T)/2 is exactly symmetric since fl(x+y) == fl(y+x)
    return DenseMatrix(0.5 * (a + a.T))


def random_vector(n: int, seed: int) -> np.ndarray:
    """Seeded uniform [-1, 1) vector, e.g. a reference solution x_true."""
    return SplitMix64(seed).uniform_array(n)


def direct_solve(system: LinearSystem) -> np.ndarray:
    """Gaussian elimination with partial pivoting.

    Verification oracle only; the CG code never calls it.
    """
    a = system.operator.to_dense()
    b = np.array(system.rhs, dtype=np.float64)
    n = a.shape[0]
    scale = np.abs(a).max(axis=1)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
            scale[[k, p]] = scale[[p, k]]
        pivot = a[k, k]
        if abs(pivot) < PIVOT_RTOL * scale[k] or pivot == 0.0:
            raise SingularMatrix(f"pivot {pivot:.3e} in column {k} is numerically zero")
        factors = a[k + 1:, k] / pivot
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= factors * b[k]
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - dot(a[k, k + 1:], x[k + 1:])) / a[k, k]
    return x
