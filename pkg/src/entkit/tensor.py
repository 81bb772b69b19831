"""Dense complex tensor-index algebra on composite index spaces.

Matrices are plain ``numpy.ndarray`` of dtype complex128.  Composite indices
follow row-major (C-order) convention with subsystem 0 slowest, so a matrix
on subsystems of dimensions ``(d0, d1, ...)`` reshapes to the tensor
``(d0, d1, ..., d0, d1, ...)`` with row axes first.  Partial transposition
and realignment are pinned to this convention by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_DIM_CAP = 4096
HERMITICITY_ATOL = 1e-12


class DimensionCapExceeded(ValueError):
    """Composite dimension exceeds the configured cap."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"composite dimension {size} exceeds the cap {cap}")


def as_matrix(m) -> np.ndarray:
    """Coerce to a contiguous 2-D complex128 array."""
    out = np.ascontiguousarray(np.asarray(m, dtype=np.complex128))
    if out.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={out.ndim}")
    return out


def check_dims(dims: Sequence[int], size: int) -> tuple[int, ...]:
    """Validate a subsystem-dimension list against a total size."""
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"subsystem dimensions must be >= 1, got {dims}")
    prod = 1
    for d in dims:
        prod *= d
    if prod != size:
        raise ValueError(f"dimensions {dims} do not factor size {size}")
    return dims


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = None
    for m in mats:
        out = as_matrix(m) if out is None else np.kron(out, as_matrix(m))
    if out is None:
        raise ValueError("kron_all needs at least one matrix")
    return out


def dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def permute_systems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Simultaneously reindex rows and columns by a subsystem permutation.

    ``perm`` lists, for each new slot, the old subsystem placed there:
    ``permute_systems(kron(A, B), (dA, dB), (1, 0)) == kron(B, A)``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("permute_systems needs a square matrix")
    dims = check_dims(dims, m.shape[0])
    k = len(dims)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(k)):
        raise ValueError(f"perm {perm} is not a permutation of 0..{k - 1}")
    axes = perm + tuple(k + p for p in perm)
    new_dims = tuple(dims[p] for p in perm)
    t = m.reshape(dims + dims).transpose(axes)
    return np.ascontiguousarray(t.reshape(m.shape))


def permute_vector(v, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reindex a vector over a composite index space by a subsystem permutation."""
    v = np.ascontiguousarray(np.asarray(v, dtype=np.complex128)).reshape(-1)
    dims = check_dims(dims, v.size)
    perm = tuple(int(p) for p in perm)
    return np.ascontiguousarray(v.reshape(dims).transpose(perm).reshape(-1))


def partial_transpose(m, dims: Sequence[int], transposed: Iterable[int]) -> np.ndarray:
    """Transpose the marked subsystem factors: |ij><kl| -> |kj><il| for factor 0."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("partial_transpose needs a square matrix")
    dims = check_dims(dims, m.shape[0])
    k = len(dims)
    marked = set(int(i) for i in transposed)
    if not marked <= set(range(k)):
        raise ValueError(f"transposed set {marked} out of range for {k} factors")
    axes = list(range(2 * k))
    for i in marked:
        axes[i], axes[k + i] = axes[k + i], axes[i]
    t = m.reshape(dims + dims).transpose(axes)
    return np.ascontiguousarray(t.reshape(m.shape))


def realign(m, dims: Sequence[int]) -> np.ndarray:
    """Reshuffle a bipartite matrix: R(|ij><kl|) = |ik><jl|.

    Output is rectangular (dA^2 x dB^2) for a (dA, dB) split.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("realign needs a square matrix")
    dims = check_dims(dims, m.shape[0])
    if len(dims) != 2:
        raise ValueError(f"realign needs a two-factor shape, got {dims}")
    da, db = dims
    t = m.reshape(da, db, da, db).transpose(0, 2, 1, 3)
    return np.ascontiguousarray(t.reshape(da * da, db * db))


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = as_matrix(m)
    return float(np.linalg.svd(m, compute_uv=False).sum())


@dataclass
class SpectrumReport:
    """Real spectrum in ascending order, optionally with eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def hermitian_spectrum(m, want_vectors: bool = False, atol: float = HERMITICITY_ATOL) -> SpectrumReport:
    """Eigendecompose a Hermitian matrix after symmetrizing rounding drift.

    Raises ValueError when the input deviates from Hermiticity beyond ``atol``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("hermitian_spectrum needs a square matrix")
    dev = float(np.abs(m - m.conj().T).max()) if m.size else 0.0
    if dev > atol:
        raise ValueError(f"matrix is not Hermitian: max|M - M^dag| = {dev:.3e} > {atol:.1e}")
    h = (m + m.conj().T) / 2
    if want_vectors:
        vals, vecs = np.linalg.eigh(h)
        return SpectrumReport(vals, vecs)
    return SpectrumReport(np.linalg.eigvalsh(h))


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` (order of ``keep`` kept)."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("partial_trace needs a square matrix")
    dims = check_dims(dims, m.shape[0])
    k = len(dims)
    keep = [int(i) for i in keep]
    if not set(keep) <= set(range(k)) or len(set(keep)) != len(keep):
        raise ValueError(f"keep set {keep} invalid for {k} factors")
    traced = [i for i in range(k) if i not in keep]
    t = m.reshape(dims + dims)
    for off, i in enumerate(sorted(traced, reverse=True)):
        t = np.trace(t, axis1=i, axis2=len(dims) - off + i)
    if keep != sorted(keep):
        order = np.argsort(np.argsort(keep))
        kd = tuple(dims[i] for i in sorted(keep))
        t = t.reshape(kd + kd)
        axes = tuple(order) + tuple(len(keep) + o for o in order)
        t = t.transpose(axes)
    d_out = 1
    for i in keep:
        d_out *= dims[i]
    return np.ascontiguousarray(t.reshape(d_out, d_out))


def swap_operator(d: int) -> np.ndarray:
    """Exchange operator V|phi x chi> = |chi x phi> on a d x d pair."""
    d = int(d)
    if d < 2:
        raise ValueError("swap_operator needs d >= 2")
    v = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            v[i * d + j, j * d + i] = 1.0
    return v


def projector(vec) -> np.ndarray:
    """Rank-one projector |v><v| for a unit vector."""
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())
