"""Permutational separability criteria and the family's PPT thresholds.

Cut conventions: every check first permutes the state to cut-major layout
(side A slowest) and partially transposes side A.  The factor-spectrum
threshold method exploits that the family's partially transposed matrix is a
commuting combination of per-factor partial transposes, so every eigenvalue
is affine in the mixing parameter:

    lam(p) = (1 - p) * prod_i N_i (1 - l_i)  +  p * prod_i l_i

with l_i running over per-factor pure-state PT eigenvalues {mu_k^2, +-mu_k mu_m}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .cuts import Bipartition
from .states import (
    EnsembleSpec,
    MixedState,
    PureFactorState,
    build_rho_p,
    cut_major_matrix,
    schmidt,
)
from .tensor import (
    SpectrumReport,
    hermitian_spectrum,
    partial_trace,
    partial_transpose,
    realign,
    trace_norm,
)

PPT_TOL = 1e-10


def _default_cut(n_parties: int, cut: Bipartition | None) -> Bipartition:
    if cut is not None:
        return cut
    if n_parties != 2:
        raise ValueError("cut is required for systems with more than 2 parties")
    return Bipartition((0,), (1,))


def pt_matrix(rho: MixedState, cut: Bipartition | None = None) -> tuple[np.ndarray, tuple[int, int]]:
    """Cut-major partial transpose (side A transposed) and the cut dimensions."""
    cut = _default_cut(rho.n_parties, cut)
    m, (da, db) = cut_major_matrix(rho, cut)
    return partial_transpose(m, (da, db), {0}), (da, db)


def pt_spectrum(rho: MixedState, cut: Bipartition | None = None, want_vectors: bool = False) -> SpectrumReport:
    """Spectrum of the partially transposed state across a cut."""
    pt, _ = pt_matrix(rho, cut)
    return hermitian_spectrum(pt, want_vectors=want_vectors, atol=1e-10)


def is_ppt(rho: MixedState, cut: Bipartition | None = None, tol: float = PPT_TOL) -> bool:
    """Positivity under partial transposition, up to ``-tol`` on the minimum eigenvalue."""
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    return float(pt_spectrum(rho, cut).eigenvalues[0]) >= -tol


def pure_pt_eigenvalues(mu: np.ndarray, dim: int) -> np.ndarray:
    """PT eigenvalues of a pure state with Schmidt coefficients ``mu``: squares,
    plus/minus cross products, padded with zeros to the full dimension."""
    mu = np.asarray(mu, dtype=np.float64)
    vals = [float(m) ** 2 for m in mu]
    r = mu.size
    for i in range(r):
        for j in range(i + 1, r):
            prod = float(mu[i] * mu[j])
            vals.append(prod)
            vals.append(-prod)
    if len(vals) > dim:
        raise ValueError("more PT eigenvalues than the space dimension")
    vals.extend([0.0] * (dim - len(vals)))
    return np.asarray(vals)


@dataclass
class PptThreshold:
    """Largest mixing parameter keeping the family PPT across one cut."""

    p_gamma: float
    method: str
    witnessing_eigentuple: tuple[float, ...] | None = None
    reason: str | None = None


def p_gamma_closed(psi1: PureFactorState, psi2: PureFactorState) -> PptThreshold:
    """Closed-form threshold from the two largest Schmidt coefficients per factor."""
    for psi in (psi1, psi2):
        if psi.n_parties != 2:
            raise ValueError("the closed form needs bipartite factor states")
    sd1 = schmidt(psi1, Bipartition((0,), (1,)))
    sd2 = schmidt(psi2, Bipartition((0,), (1,)))
    if sd1.rank == 1 and sd2.rank == 1:
        return PptThreshold(1.0, "closed_form", None, "all factors separable; PPT for every p")
    if sd1.rank == 1 or sd2.rank == 1:
        which = "first" if sd1.rank == 1 else "second"
        return PptThreshold(0.0, "closed_form", None, f"{which} factor separable; NPT for every p > 0")
    m1, m2 = sd1.coefficients, sd2.coefficients
    n1 = 1.0 / (psi1.dim - 1)
    n2 = 1.0 / (psi2.dim - 1)
    t1 = (1.0 - m1[0] ** 2) * (1.0 + m2[0] * m2[1]) / (m1[0] ** 2 * m2[0] * m2[1])
    t2 = (1.0 - m2[0] ** 2) * (1.0 + m1[0] * m1[1]) / (m2[0] ** 2 * m1[0] * m1[1])
    if t1 <= t2:
        tup = (float(m1[0] ** 2), float(-m2[0] * m2[1]))
        k = n1 * n2 * t1
    else:
        tup = (float(-m1[0] * m1[1]), float(m2[0] ** 2))
        k = n1 * n2 * t2
    return PptThreshold(k / (1.0 + k), "closed_form", tup)


def p_gamma_exact(spec: EnsembleSpec, cut: Bipartition | None = None, method: str = "factor_spectrum") -> PptThreshold:
    """Largest p with a positive partial transpose across ``cut``.

    ``factor_spectrum`` enumerates per-factor PT eigenvalue tuples (each joint
    eigenvalue is affine in p); ``dense_bisection`` bisects the minimum
    eigenvalue of the assembled matrix and serves as a cross-check and as the
    fallback for layouts the spectral shortcut does not cover.
    """
    cut = _default_cut(spec.n_parties, cut)
    if method == "dense_bisection":
        return _p_gamma_dense(spec, cut)
    if method != "factor_spectrum":
        raise ValueError(f"unknown method {method!r}")

    decs = [schmidt(f, cut) for f in spec.factors]
    ranks = [d.rank for d in decs]
    if all(r == 1 for r in ranks):
        return PptThreshold(1.0, "factor_spectrum", None, "all factors separable across the cut; PPT for every p")
    if any(r == 1 for r in ranks):
        sep = [i for i, r in enumerate(ranks) if r == 1]
        return PptThreshold(
            0.0,
            "factor_spectrum",
            None,
            f"factor(s) {sep} separable across the cut; NPT for every p > 0",
        )

    norms = spec.normalizations()
    a = np.ones(1)
    b = np.ones(1)
    lam_lists = []
    for f, dec, n in zip(spec.factors, decs, norms):
        lam = pure_pt_eigenvalues(dec.coefficients, f.dim)
        lam_lists.append(lam)
        a = np.kron(a, n * (1.0 - lam))
        b = np.kron(b, lam)
    neg = b < 0.0
    if not neg.any():
        return PptThreshold(1.0, "factor_spectrum", None, "no negative PT direction; PPT for every p")
    crossings = a[neg] / (a[neg] - b[neg])
    best = int(np.argmin(crossings))
    idx_flat = np.flatnonzero(neg)[best]
    sizes = tuple(lam.size for lam in lam_lists)
    per_factor_idx = np.unravel_index(idx_flat, sizes)
    tup = tuple(float(lam_lists[i][j]) for i, j in enumerate(per_factor_idx))
    return PptThreshold(float(crossings[best]), "factor_spectrum", tup)


def _p_gamma_dense(spec: EnsembleSpec, cut: Bipartition, steps: int = 60) -> PptThreshold:
    def min_eig(p: float) -> float:
        rho = build_rho_p(spec.with_p(p))
        return float(pt_spectrum(rho, cut).eigenvalues[0])

    if min_eig(1.0) >= -1e-14:
        return PptThreshold(1.0, "dense_bisection", None, "PPT for every p")
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if min_eig(mid) >= -1e-14:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return PptThreshold(0.5 * (lo + hi), "dense_bisection", None)


def p_gamma_maxent(dims) -> Fraction:
    """Exact threshold for a family of maximally entangled factors.

    For side dimensions d_1 <= ... <= d_M the threshold is
    1 / (1 + (d_M - 1) * prod_{i<M} (d_i + 1)).
    """
    ds = sorted(int(d) for d in dims)
    if not ds or any(d < 2 for d in ds):
        raise ValueError("need factor side dimensions >= 2")
    prod = 1
    for d in ds[:-1]:
        prod *= d + 1
    return Fraction(1, 1 + (ds[-1] - 1) * prod)


def realignment_norm(rho: MixedState, cut: Bipartition | None = None) -> float:
    """Trace norm of the realigned density matrix across a cut."""
    cut = _default_cut(rho.n_parties, cut)
    m, (da, db) = cut_major_matrix(rho, cut)
    return trace_norm(realign(m, (da, db)))


def realignment_norm_closed(d: int, m: int, p: float) -> float:
    """Closed-form realignment norm for m maximally entangled d x d factors.

    Implements the sign-corrected variant |1 - p + p(1 - d^2)^j|, which the
    direct reshuffle computation confirms; see ``realignment_norm_closed_printed``
    for the uncorrected expression kept for comparison.
    """
    d, m = int(d), int(m)
    if d < 2 or m < 1 or not 0.0 <= p <= 1.0:
        raise ValueError("need d >= 2, m >= 1 and p in [0, 1]")
    total = 0.0
    for j in range(m + 1):
        total += comb(m, j) * abs(1.0 - p + p * (1.0 - d * d) ** j)
    return total / d**m


def realignment_norm_closed_printed(d: int, m: int, p: float) -> float:
    """Uncorrected variant |1 - p - p(1 - d^2)^j|, exposed for comparison only."""
    d, m = int(d), int(m)
    if d < 2 or m < 1 or not 0.0 <= p <= 1.0:
        raise ValueError("need d >= 2, m >= 1 and p in [0, 1]")
    total = 0.0
    for j in range(m + 1):
        total += comb(m, j) * abs(1.0 - p - p * (1.0 - d * d) ** j)
    return total / d**m


def realignment_threshold_maxent(d1: int, d2: int) -> float:
    """Mixing parameter above which realignment detects a pair of maximally
    entangled factors: (d1 d2 - 2) / (d1^2 (d2^2 - 2)), for 2 <= d1 <= d2."""
    d1, d2 = int(d1), int(d2)
    if not 2 <= d1 <= d2:
        raise ValueError("need 2 <= d1 <= d2")
    return (d1 * d2 - 2) / (d1**2 * (d2**2 - 2))


@dataclass
class DistillabilityCertificate:
    """A Schmidt-rank-(<=2) vector with negative PT expectation."""

    vector: np.ndarray
    value: float
    schmidt_rank_across_cut: int


def _vector_rank(vec: np.ndarray, da: int, db: int, tol: float = 1e-9) -> int:
    s = np.linalg.svd(vec.reshape(da, db), compute_uv=False)
    return int((s > tol).sum())


def _truncate_rank2(vec: np.ndarray, da: int, db: int) -> np.ndarray:
    u, s, vh = np.linalg.svd(vec.reshape(da, db), full_matrices=False)
    k = min(2, s.size)
    out = (u[:, :k] * s[:k]) @ vh[:k, :]
    out = out.reshape(-1)
    return out / np.linalg.norm(out)


def distillability_certificate(
    rho: MixedState, cut: Bipartition | None = None, tol: float = PPT_TOL
) -> DistillabilityCertificate | None:
    """Rank-2 negativity certificate of the partial transpose, or None when PPT.

    The minimal PT eigenvector is used directly when its Schmidt rank across
    the cut is at most 2.  Degenerate eigenspaces can mix rank-2 directions,
    so otherwise the vector is truncated to its best rank-2 approximation and,
    if that loses negativity, refined by a rank-2-projected power iteration.
    """
    cut = _default_cut(rho.n_parties, cut)
    pt, (da, db) = pt_matrix(rho, cut)
    rep = hermitian_spectrum(pt, want_vectors=True, atol=1e-10)
    lam_min = float(rep.eigenvalues[0])
    if lam_min >= -tol:
        return None
    vec = np.ascontiguousarray(rep.eigenvectors[:, 0])
    rank = _vector_rank(vec, da, db)
    if rank <= 2:
        return DistillabilityCertificate(vec, lam_min, rank)

    pt_h = (pt + pt.conj().T) / 2
    cand = _truncate_rank2(vec, da, db)
    val = float((cand.conj() @ pt_h @ cand).real)
    if val >= -tol:
        shift = float(rep.eigenvalues[-1])
        x = cand
        prev = val
        for _ in range(500):
            x = shift * x - pt_h @ x
            nx = np.linalg.norm(x)
            if nx < 1e-300:
                break
            x = _truncate_rank2(x / nx, da, db)
            val = float((x.conj() @ pt_h @ x).real)
            if abs(prev - val) < 1e-14:
                break
            prev = val
        cand = x
    if val < -tol:
        return DistillabilityCertificate(cand, val, _vector_rank(cand, da, db))
    return None


def reduction_check(rho: MixedState, cut: Bipartition | None = None, tol: float = 1e-10) -> bool:
    """Reduction criterion across a cut: rho_A (x) 1 - rho >= -tol."""
    cut = _default_cut(rho.n_parties, cut)
    m, (da, db) = cut_major_matrix(rho, cut)
    rho_a = partial_trace(m, (da, db), keep=[0])
    gap = np.kron(rho_a, np.eye(db, dtype=np.complex128)) - m
    return float(hermitian_spectrum(gap, atol=1e-10).eigenvalues[0]) >= -tol
