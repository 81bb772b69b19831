"""Shared fixtures and independent oracles.

The oracles here are deliberately written with explicit index loops (or raw
index arithmetic) so they do not share code paths with the package's
reshape/transpose implementations.
"""

import numpy as np
import pytest


def pt_oracle(m, da, db):
    """Partial transpose of the first factor by explicit entry reindexing:
    the (|ij><kl|) component moves to (|kj><il|)."""
    out = np.zeros_like(np.asarray(m, dtype=complex))
    for i in range(da):
        for j in range(db):
            for k in range(da):
                for l in range(db):
                    out[k * db + j, i * db + l] = m[i * db + j, k * db + l]
    return out


def realign_oracle(m, da, db):
    """Realignment by explicit entry reindexing: (|ij><kl|) -> (|ik><jl|)."""
    out = np.zeros((da * da, db * db), dtype=complex)
    for i in range(da):
        for j in range(db):
            for k in range(da):
                for l in range(db):
                    out[i * da + k, j * db + l] = m[i * db + j, k * db + l]
    return out


def schmidt_oracle(amplitudes, da, db):
    """Schmidt coefficients from an SVD of the (da, db) coefficient matrix."""
    s = np.linalg.svd(np.asarray(amplitudes, dtype=complex).reshape(da, db), compute_uv=False)
    return s[s > 1e-12]


def random_density(rng, da, db, k):
    """Normalized Wishart density matrix on a (da x db) bipartite space."""
    d = da * db
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ppt_density(rng, da, db, k, max_tries=500):
    """Rejection-sample a density matrix that stays PSD under the PT oracle."""
    for _ in range(max_tries):
        rho = random_density(rng, da, db, k)
        pt = pt_oracle(rho, da, db)
        if np.linalg.eigvalsh(pt)[0] >= -1e-12:
            return rho
    raise RuntimeError("no PPT sample found")


def random_unit(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def haar_unitary(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def group_sides_oracle(rho_fm, pair_dims):
    """Reorder a factor-major matrix over bipartite factors ((a1,b1),(a2,b2),...)
    into cut-major (A1 A2 ... | B1 B2 ...) order by raw index arithmetic."""
    pair_dims = [tuple(p) for p in pair_dims]
    dims_fm = [d for pair in pair_dims for d in pair]
    total = int(np.prod(dims_fm))
    a_dims = [p[0] for p in pair_dims]
    b_dims = [p[1] for p in pair_dims]
    perm = np.empty(total, dtype=int)
    for idx in range(total):
        rem = idx
        digits = []
        for d in reversed(dims_fm):
            digits.append(rem % d)
            rem //= d
        digits.reverse()
        a_digits = digits[0::2]
        b_digits = digits[1::2]
        cm = 0
        for d, dig in zip(a_dims + b_dims, a_digits + b_digits):
            cm = cm * d + dig
        perm[cm] = idx
    return rho_fm[np.ix_(perm, perm)]


def rho_family_oracle(factor_vecs, p):
    """Assemble the mixed family in factor-major layout with raw kron calls."""
    sep = np.ones((1, 1), dtype=complex)
    pur = np.ones((1, 1), dtype=complex)
    for v in factor_vecs:
        d = v.size
        proj = np.outer(v, v.conj())
        sep = np.kron(sep, (np.eye(d) - proj) / (d - 1))
        pur = np.kron(pur, proj)
    return (1 - p) * sep + p * pur


def p_gamma_bisect_oracle(factor_vecs, pair_dims, steps=80):
    """Threshold in p from bisection on the cut-major PT minimum eigenvalue."""
    a_dims = [p[0] for p in pair_dims]
    da = int(np.prod(a_dims))
    db = int(np.prod([p[1] for p in pair_dims]))

    def min_eig(p):
        rho = rho_family_oracle(factor_vecs, p)
        cm = group_sides_oracle(rho, pair_dims)
        pt = pt_oracle(cm, da, db)
        return np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0]

    if min_eig(1.0) >= -1e-13:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = (lo + hi) / 2
        if min_eig(mid) >= -1e-13:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def product_overlap_max_oracle(amplitudes, da, db, restarts=20, iters=200, seed=0):
    """Maximize |<psi|a x b>|^2 by alternating power steps on the coefficient
    matrix; independent of any SVD routine."""
    rng = np.random.default_rng(seed)
    m = np.asarray(amplitudes, dtype=complex).reshape(da, db)
    best = 0.0
    for _ in range(restarts):
        b = random_unit(rng, db)
        for _ in range(iters):
            a = m @ b.conj()
            na = np.linalg.norm(a)
            if na < 1e-300:
                break
            a /= na
            b = m.T @ a.conj()
            nb = np.linalg.norm(b)
            if nb < 1e-300:
                break
            b /= nb
        val = abs(np.sum(m.conj() * np.outer(a, b))) ** 2
        best = max(best, val)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
