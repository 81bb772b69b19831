"""Hot numeric kernels, jitted with numba when available.

Two inner loops dominate runtime: the alternating product-state minimization
behind the witness parameter search, and bulk expectation values of an
operator over random product vectors.  Both are provided in two variants:

* a loop-style kernel compiled with ``numba.njit`` (default), and
* a vectorized pure-numpy fallback.

Set the environment variable ``ENTKIT_NO_NUMBA=1`` to force the numpy path
(also used as the baseline in ``benchmarks/bench_accel.py``).  If numba is
not importable the fallback is selected automatically.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


HAVE_NUMBA = _numba_available()
USE_NUMBA = HAVE_NUMBA and os.environ.get("ENTKIT_NO_NUMBA", "") in ("", "0")

# Restarts whose product-overlap term underflows this are discarded.
_OVERLAP_FLOOR = 1e-28


def _seesaw_minimize_numpy(Qt, psi, starts_a, starts_b, max_iter, tol, window, ridge):
    """Minimize <a@b|Q|a@b> / |<psi|a@b>|^2 over product vectors a (x) b.

    ``Qt`` is Q reshaped to (dA, dB, dA, dB); ``psi`` is the reference vector
    reshaped to (dA, dB).  One run per row of ``starts_a``/``starts_b``; each
    half-step solves the rank-one-denominator Rayleigh problem exactly.
    Returns (best value, best a, best b, best run converged, valid runs).
    """
    dA, dB = psi.shape
    n_runs = starts_a.shape[0]
    eye_a = np.eye(dA)
    eye_b = np.eye(dB)
    best_val = np.inf
    best_a = np.zeros(dA, np.complex128)
    best_b = np.zeros(dB, np.complex128)
    best_conv = False
    valid = 0
    for r in range(n_runs):
        a = starts_a[r].copy()
        b = starts_b[r].copy()
        na = np.linalg.norm(a)
        nb = np.linalg.norm(b)
        if na < 1e-14 or nb < 1e-14:
            continue
        a /= na
        b /= nb
        prev = np.inf
        val = np.inf
        stall = 0
        conv = False
        ok = False
        for _ in range(max_iter):
            ma = np.einsum("ijkl,j,l->ik", Qt, b.conj(), b)
            ca = psi @ b.conj()
            if (np.abs(ca) ** 2).sum() < _OVERLAP_FLOOR:
                ok = False
                break
            delta = ridge * max(ma.trace().real / dA, 1e-300)
            a = np.linalg.solve(ma + delta * eye_a, ca)
            a /= np.linalg.norm(a)

            mb = np.einsum("ijkl,i,k->jl", Qt, a.conj(), a)
            cb = psi.T @ a.conj()
            if (np.abs(cb) ** 2).sum() < _OVERLAP_FLOOR:
                ok = False
                break
            delta = ridge * max(mb.trace().real / dB, 1e-300)
            b = np.linalg.solve(mb + delta * eye_b, cb)
            b /= np.linalg.norm(b)

            den = abs(cb.conj() @ b) ** 2
            if den < _OVERLAP_FLOOR:
                ok = False
                break
            val = (b.conj() @ mb @ b).real / den
            ok = True
            if prev - val < tol:
                stall += 1
                if stall >= window:
                    conv = True
                    break
            else:
                stall = 0
            prev = val
        if not ok or not np.isfinite(val):
            continue
        valid += 1
        if val < best_val:
            best_val = val
            best_a = a.copy()
            best_b = b.copy()
            best_conv = conv
    return best_val, best_a, best_b, best_conv, valid


def _seesaw_minimize_loops(Qt, psi, starts_a, starts_b, max_iter, tol, window, ridge):
    dA, dB = psi.shape
    n_runs = starts_a.shape[0]
    best_val = np.inf
    best_a = np.zeros(dA, np.complex128)
    best_b = np.zeros(dB, np.complex128)
    best_conv = False
    valid = 0
    ma = np.empty((dA, dA), np.complex128)
    mb = np.empty((dB, dB), np.complex128)
    ca = np.empty(dA, np.complex128)
    cb = np.empty(dB, np.complex128)
    for r in range(n_runs):
        a = starts_a[r].copy()
        b = starts_b[r].copy()
        na = np.sqrt((np.abs(a) ** 2).sum())
        nb = np.sqrt((np.abs(b) ** 2).sum())
        if na < 1e-14 or nb < 1e-14:
            continue
        a /= na
        b /= nb
        prev = np.inf
        val = np.inf
        stall = 0
        conv = False
        ok = False
        for _ in range(max_iter):
            # alpha half-step: quadratic form and overlap vector at fixed b
            tr = 0.0
            for i in range(dA):
                for k in range(dA):
                    s = 0.0 + 0.0j
                    for j in range(dB):
                        t = 0.0 + 0.0j
                        for l in range(dB):
                            t += Qt[i, j, k, l] * b[l]
                        s += np.conj(b[j]) * t
                    ma[i, k] = s
                tr += ma[i, i].real
            nca = 0.0
            for i in range(dA):
                s = 0.0 + 0.0j
                for j in range(dB):
                    s += psi[i, j] * np.conj(b[j])
                ca[i] = s
                nca += abs(s) ** 2
            if nca < _OVERLAP_FLOOR:
                ok = False
                break
            delta = ridge * max(tr / dA, 1e-300)
            for i in range(dA):
                ma[i, i] += delta
            a = np.linalg.solve(ma, ca)
            a /= np.sqrt((np.abs(a) ** 2).sum())

            # beta half-step at fixed a
            tr = 0.0
            for j in range(dB):
                for l in range(dB):
                    s = 0.0 + 0.0j
                    for i in range(dA):
                        t = 0.0 + 0.0j
                        for k in range(dA):
                            t += Qt[i, j, k, l] * a[k]
                        s += np.conj(a[i]) * t
                    mb[j, l] = s
                tr += mb[j, j].real
            ncb = 0.0
            for j in range(dB):
                s = 0.0 + 0.0j
                for i in range(dA):
                    s += psi[i, j] * np.conj(a[i])
                cb[j] = s
                ncb += abs(s) ** 2
            if ncb < _OVERLAP_FLOOR:
                ok = False
                break
            mb_plain = mb.copy()
            delta = ridge * max(tr / dB, 1e-300)
            for j in range(dB):
                mb[j, j] += delta
            b = np.linalg.solve(mb, cb)
            b /= np.sqrt((np.abs(b) ** 2).sum())

            num = 0.0
            ov = 0.0 + 0.0j
            for j in range(dB):
                s = 0.0 + 0.0j
                for l in range(dB):
                    s += mb_plain[j, l] * b[l]
                num += (np.conj(b[j]) * s).real
                ov += np.conj(cb[j]) * b[j]
            den = abs(ov) ** 2
            if den < _OVERLAP_FLOOR:
                ok = False
                break
            val = num / den
            ok = True
            if prev - val < tol:
                stall += 1
                if stall >= window:
                    conv = True
                    break
            else:
                stall = 0
            prev = val
        if not ok or not np.isfinite(val):
            continue
        valid += 1
        if val < best_val:
            best_val = val
            best_a = a.copy()
            best_b = b.copy()
            best_conv = conv
    return best_val, best_a, best_b, best_conv, valid


def _batch_product_expectations_numpy(Wt, alphas, betas):
    """Normalized expectations <a@b|W|a@b> for each row pair (a, b)."""
    dA, dB = Wt.shape[0], Wt.shape[1]
    w = Wt.reshape(dA * dB, dA * dB)
    vecs = (alphas[:, :, None] * betas[:, None, :]).reshape(alphas.shape[0], dA * dB)
    norms2 = (np.abs(vecs) ** 2).sum(axis=1)
    vals = np.einsum("rd,de,re->r", vecs.conj(), w, vecs).real
    return vals / norms2


def _batch_product_expectations_loops(Wt, alphas, betas):
    dA, dB = Wt.shape[0], Wt.shape[1]
    n = alphas.shape[0]
    out = np.empty(n, np.float64)
    for r in range(n):
        a = alphas[r]
        b = betas[r]
        acc = 0.0
        for i in range(dA):
            for j in range(dB):
                cij = np.conj(a[i] * b[j])
                s = 0.0 + 0.0j
                for k in range(dA):
                    t = 0.0 + 0.0j
                    for l in range(dB):
                        t += Wt[i, j, k, l] * b[l]
                    s += a[k] * t
                acc += (cij * s).real
        na2 = (np.abs(a) ** 2).sum()
        nb2 = (np.abs(b) ** 2).sum()
        out[r] = acc / (na2 * nb2)
    return out


seesaw_minimize_numpy = _seesaw_minimize_numpy
batch_product_expectations_numpy = _batch_product_expectations_numpy

if HAVE_NUMBA:
    import numba

    seesaw_minimize_numba = numba.njit(cache=True)(_seesaw_minimize_loops)
    batch_product_expectations_numba = numba.njit(cache=True)(_batch_product_expectations_loops)
else:
    seesaw_minimize_numba = None
    batch_product_expectations_numba = None

if USE_NUMBA:
    seesaw_minimize = seesaw_minimize_numba
    batch_product_expectations = batch_product_expectations_numba
else:
    seesaw_minimize = seesaw_minimize_numpy
    batch_product_expectations = batch_product_expectations_numpy
