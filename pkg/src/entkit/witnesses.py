"""Canonical witnesses for the mixed family and the tensor-extension machinery.

For a pair of factor states the detection operator is

    W_eps = P_1 (x) 1 + 1 (x) P_2 - (2 + eps) P_1 (x) P_2
          = 1 - (1 - P_1)(x)(1 - P_2) - (1 + eps) P_1 (x) P_2,

which annihilates the separable part of the family and gives expectation
-p*eps on the mixed state.  The same pattern generalizes to M factors as
W_gen = 1 - (x)_i(1 - P_i) - (1 + eps)(x)_i P_i.

The largest admissible eps is 1 less than the minimum, over product vectors
across the cut, of <v|Q|v> / |<Psi|v>|^2 with Q the projector part and Psi
the pure product of the factors.  That minimum is estimated by multi-restart
alternating minimization; each half-step is a rank-one-denominator Rayleigh
problem solved exactly by one Hermitian linear solve (see ``_accel``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .cuts import Bipartition
from .criteria import is_ppt, p_gamma_exact
from .states import (
    EnsembleSpec,
    MixedState,
    PureFactorState,
    build_rho_p,
    cut_dims,
    cut_major_matrix,
    cut_major_vector,
    cut_permutation,
    ensemble_product_vector,
    fine_dims,
    schmidt,
)
from .tensor import kron, kron_all, partial_trace, permute_systems, projector


@dataclass
class Witness:
    """Hermitian detection operator in factor-major layout plus its grid."""

    matrix: np.ndarray
    factor_party_dims: tuple[tuple[int, ...], ...]
    kind: str
    epsilon: float = 0.0
    schmidt_k: int | None = None

    def __post_init__(self):
        grid = tuple(tuple(int(d) for d in row) for row in self.factor_party_dims)
        self.factor_party_dims = grid
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.complex128))
        dim = int(np.prod([d for row in grid for d in row]))
        if m.shape != (dim, dim):
            raise ValueError(f"witness shape {m.shape} != grid dimension {dim}")
        if float(np.abs(m - m.conj().T).max()) > 1e-12:
            raise ValueError("witness must be Hermitian")
        self.matrix = m

    @property
    def n_parties(self) -> int:
        return len(self.factor_party_dims[0])

    @property
    def party_shape(self) -> tuple[int, ...]:
        n = self.n_parties
        return tuple(int(np.prod([row[j] for row in self.factor_party_dims])) for j in range(n))

    def cut_major(self, cut: Bipartition | None = None) -> tuple[np.ndarray, tuple[int, int]]:
        cut = cut if cut is not None else Bipartition((0,), (1,))
        dims = fine_dims(self.factor_party_dims)
        perm = cut_permutation(self.factor_party_dims, cut)
        return permute_systems(self.matrix, dims, perm), cut_dims(self.factor_party_dims, cut)


def build_W_eps(psi1: PureFactorState, psi2: PureFactorState, eps: float) -> Witness:
    """Two-factor witness P1(x)1 + 1(x)P2 - (2 + eps) P1(x)P2."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    p1, p2 = psi1.density(), psi2.density()
    i1 = np.eye(psi1.dim, dtype=np.complex128)
    i2 = np.eye(psi2.dim, dtype=np.complex128)
    m = kron(p1, i2) + kron(i1, p2) - (2.0 + eps) * kron(p1, p2)
    return Witness(m, (psi1.party_dims, psi2.party_dims), "W_eps", eps)


def build_W_tilde(psi1: PureFactorState, psi2: PureFactorState, eps: float) -> Witness:
    """Simplified witness P1 (x) (1 - (1 + eps) P2)."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    p1, p2 = psi1.density(), psi2.density()
    i2 = np.eye(psi2.dim, dtype=np.complex128)
    m = kron(p1, i2 - (1.0 + eps) * p2)
    return Witness(m, (psi1.party_dims, psi2.party_dims), "W_tilde", eps)


def build_W_gen(factors, eps: float) -> Witness:
    """M-factor witness 1 - (x)_i(1 - P_i) - (1 + eps)(x)_i P_i.

    The coefficient on the product projector is pinned by the requirement
    that the expectation on the mixed family equals -p*eps and that the
    two-factor case reduces exactly to ``build_W_eps``.
    """
    factors = tuple(factors)
    if len(factors) < 2:
        raise ValueError("need at least two factor states")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    projs = [f.density() for f in factors]
    comps = [np.eye(f.dim, dtype=np.complex128) - p for f, p in zip(factors, projs)]
    dim = int(np.prod([f.dim for f in factors]))
    m = np.eye(dim, dtype=np.complex128) - kron_all(comps) - (1.0 + eps) * kron_all(projs)
    return Witness(m, tuple(f.party_dims for f in factors), "W_gen", eps)


def expectation(w: Witness, rho: MixedState) -> float:
    """tr(W rho) for operators sharing the same factor-major grid."""
    if fine_dims(w.factor_party_dims) != fine_dims(rho.factor_party_dims):
        raise ValueError("witness and state grids do not match")
    return float(np.trace(w.matrix @ rho.matrix).real)


def nontrivial_predicate(psi1: PureFactorState, psi2: PureFactorState, tol: float = 1e-9) -> bool:
    """True when the factors' Schmidt spectra differ, i.e. some eps > 0 is admissible."""
    cut = Bipartition((0,), (1,))
    for psi in (psi1, psi2):
        if psi.n_parties != 2:
            raise ValueError("nontrivial_predicate needs bipartite factor states")
    m1 = schmidt(psi1, cut).coefficients
    m2 = schmidt(psi2, cut).coefficients
    n = max(m1.size, m2.size)
    pad1 = np.zeros(n)
    pad2 = np.zeros(n)
    pad1[: m1.size] = m1
    pad2[: m2.size] = m2
    return bool(np.abs(pad1 - pad2).max() > tol)


# ---------------------------------------------------------------------------
# eps estimation by alternating product-vector minimization
# ---------------------------------------------------------------------------


@dataclass
class SeesawConfig:
    restarts: int = 200
    max_iter: int = 300
    tol: float = 1e-12
    window: int = 5
    ridge: float = 1e-12
    seed: int = 0


@dataclass
class EpsilonEstimate:
    """Upper bound on the maximal admissible eps, with the minimizing product pair."""

    upper_bound: float
    certificate: tuple[np.ndarray, np.ndarray] | None
    restarts_used: int
    converged: bool
    note: str | None = None
    best_quotient: float = field(default=np.nan, repr=False)


def _schmidt_product_seeds(factors, cut, decs) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic seeds: top-Schmidt product, and for pairs the basis-aligned
    sums that certify eps = 0 analytically in the equal-spectrum case."""
    seeds = []
    a = None
    b = None
    for dec in decs:
        ua, vb = dec.left_basis[:, 0], dec.right_basis[:, 0]
        a = ua if a is None else np.kron(a, ua)
        b = vb if b is None else np.kron(b, vb)
    seeds.append((a, b))
    if len(factors) == 2:
        d1, d2 = decs
        r = min(d1.rank, d2.rank)
        a = np.zeros(d1.left_basis.shape[0] * d2.left_basis.shape[0], np.complex128)
        b = np.zeros(d1.right_basis.shape[0] * d2.right_basis.shape[0], np.complex128)
        for s in range(r):
            a += np.kron(d1.left_basis[:, s], d2.left_basis[:, s])
            b += np.kron(d1.right_basis[:, s], d2.right_basis[:, s])
        seeds.append((a, b))
        if d1.rank >= d2.rank:
            a = np.zeros_like(a)
            b = np.zeros_like(b)
            for s in range(d2.rank):
                scale = np.sqrt(d2.coefficients[s] / d1.coefficients[s])
                a += scale * np.kron(d1.left_basis[:, s], d2.left_basis[:, s])
                b += scale * np.kron(d1.right_basis[:, s], d2.right_basis[:, s])
            seeds.append((a, b))
    return seeds


def _run_seesaw(q_matrix, grid, cut, psi_vec, config, extra_seeds=()) -> EpsilonEstimate:
    dims = fine_dims(grid)
    perm = cut_permutation(grid, cut)
    da, db = cut_dims(grid, cut)
    q_cm = permute_systems(q_matrix, dims, perm)
    qt = np.ascontiguousarray(q_cm.reshape(da, db, da, db))
    psi_cm = np.ascontiguousarray(cut_major_vector(psi_vec, grid, cut).reshape(da, db))

    rng = np.random.default_rng(config.seed)
    n_rand = max(int(config.restarts), 0)
    starts_a = np.empty((n_rand + len(extra_seeds), da), np.complex128)
    starts_b = np.empty((n_rand + len(extra_seeds), db), np.complex128)
    for i, (sa, sb) in enumerate(extra_seeds):
        starts_a[i] = sa
        starts_b[i] = sb
    for i in range(n_rand):
        starts_a[len(extra_seeds) + i] = rng.standard_normal(da) + 1j * rng.standard_normal(da)
        starts_b[len(extra_seeds) + i] = rng.standard_normal(db) + 1j * rng.standard_normal(db)

    best, a, b, conv, valid = _accel.seesaw_minimize(
        qt, psi_cm, starts_a, starts_b, config.max_iter, config.tol, config.window, config.ridge
    )
    if not np.isfinite(best):
        return EpsilonEstimate(0.0, None, 0, False, "no restart produced a usable product overlap")
    side_a_dims = tuple(int(np.prod([grid[f][p] for p in cut.side_a])) for f in range(len(grid)))
    side_b_dims = tuple(int(np.prod([grid[f][p] for p in cut.side_b])) for f in range(len(grid)))
    cert = (a.reshape(side_a_dims), b.reshape(side_b_dims))
    return EpsilonEstimate(max(float(best) - 1.0, 0.0), cert, int(valid), bool(conv), best_quotient=float(best))


def epsilon_estimate_cut(factors, cut: Bipartition, config: SeesawConfig | None = None) -> EpsilonEstimate:
    """Estimate the maximal eps of the M-factor witness across one cut.

    Analytic zeros are returned without search: every factor product across
    the cut, or a two-factor ensemble whose cut Schmidt spectra coincide.
    """
    factors = tuple(factors)
    config = config or SeesawConfig()
    decs = [schmidt(f, cut) for f in factors]
    if all(d.rank == 1 for d in decs):
        return EpsilonEstimate(0.0, None, 0, True, "all factors product across the cut; eps = 0")
    if len(factors) == 2:
        mus = [d.coefficients for d in decs]
        n = max(m.size for m in mus)
        pads = [np.pad(m, (0, n - m.size)) for m in mus]
        if np.abs(pads[0] - pads[1]).max() <= 1e-9:
            seeds = _schmidt_product_seeds(factors, cut, decs)
            cert = _seed_certificate(seeds[1], factors, cut)
            return EpsilonEstimate(0.0, cert, 0, True, "equal Schmidt spectra across the cut force eps = 0")

    projs = [f.density() for f in factors]
    comps = [np.eye(f.dim, dtype=np.complex128) - p for f, p in zip(factors, projs)]
    dim = int(np.prod([f.dim for f in factors]))
    q = np.eye(dim, dtype=np.complex128) - kron_all(comps)
    psi_vec = ensemble_product_vector(EnsembleSpec(factors, 0.0))
    grid = tuple(f.party_dims for f in factors)
    seeds = _schmidt_product_seeds(factors, cut, decs)
    return _run_seesaw(q, grid, cut, psi_vec, config, extra_seeds=seeds)


def _seed_certificate(seed, factors, cut):
    sa, sb = seed
    grid = tuple(f.party_dims for f in factors)
    side_a_dims = tuple(int(np.prod([grid[f][p] for p in cut.side_a])) for f in range(len(grid)))
    side_b_dims = tuple(int(np.prod([grid[f][p] for p in cut.side_b])) for f in range(len(grid)))
    sa = sa / np.linalg.norm(sa)
    sb = sb / np.linalg.norm(sb)
    return (sa.reshape(side_a_dims), sb.reshape(side_b_dims))


def epsilon_estimate(
    psi1: PureFactorState,
    psi2: PureFactorState,
    kind: str = "W_eps",
    config: SeesawConfig | None = None,
) -> EpsilonEstimate:
    """Upper bound on the maximal eps for a two-factor witness.

    ``kind`` selects the full witness ("W_eps") or the simplified one-sided
    form ("W_tilde").  Both searches minimize a ratio of quadratic forms over
    product vectors; the bound is the best value found minus one, clamped at
    zero.  The returned certificate reshapes the minimizing product pair into
    the rectangular matrices of the underlying bilinear problem.
    """
    for psi in (psi1, psi2):
        if psi.n_parties != 2:
            raise ValueError("epsilon_estimate needs bipartite factor states")
    config = config or SeesawConfig()
    cut = Bipartition((0,), (1,))
    if kind == "W_eps":
        return epsilon_estimate_cut((psi1, psi2), cut, config)
    if kind != "W_tilde":
        raise ValueError(f"unknown witness kind {kind!r}")

    decs = [schmidt(psi1, cut), schmidt(psi2, cut)]
    if decs[0].rank >= decs[1].rank:
        seeds = _schmidt_product_seeds((psi1, psi2), cut, decs)
        cert = _seed_certificate(seeds[-1], (psi1, psi2), cut)
        return EpsilonEstimate(
            0.0, cert, 0, True, "rank(psi1) >= rank(psi2): the one-sided witness stays trivial"
        )
    q = kron(psi1.density(), np.eye(psi2.dim, dtype=np.complex128))
    psi_vec = np.kron(psi1.amplitudes, psi2.amplitudes)
    grid = (psi1.party_dims, psi2.party_dims)
    seeds = _schmidt_product_seeds((psi1, psi2), cut, decs)
    return _run_seesaw(q, grid, cut, psi_vec, config, extra_seeds=seeds)


def product_expectation(w: Witness, alpha, beta, cut: Bipartition | None = None) -> float:
    """Normalized expectation <a (x) b|W|a (x) b> for cut-side vectors."""
    cut = cut if cut is not None else Bipartition((0,), (1,))
    m, (da, db) = w.cut_major(cut)
    a = np.asarray(alpha, dtype=np.complex128).reshape(-1)
    b = np.asarray(beta, dtype=np.complex128).reshape(-1)
    if a.size != da or b.size != db:
        raise ValueError("certificate sides do not match the cut dimensions")
    v = np.kron(a, b)
    v /= np.linalg.norm(v)
    return float((v.conj() @ m @ v).real)


def sample_product_expectations(w: Witness, n: int, seed: int, cut: Bipartition | None = None) -> np.ndarray:
    """Expectations of the witness on ``n`` seeded random product vectors."""
    cut = cut if cut is not None else Bipartition((0,), (1,))
    m, (da, db) = w.cut_major(cut)
    rng = np.random.default_rng(seed)
    alphas = rng.standard_normal((n, da)) + 1j * rng.standard_normal((n, da))
    betas = rng.standard_normal((n, db)) + 1j * rng.standard_normal((n, db))
    wt = np.ascontiguousarray(m.reshape(da, db, da, db))
    return _accel.batch_product_expectations(wt, alphas, betas)


# ---------------------------------------------------------------------------
# Schmidt-number witnesses and tensor extensions
# ---------------------------------------------------------------------------


def max_overlap_schmidt_k(psi: PureFactorState, k: int) -> float:
    """Largest overlap |<psi|phi>|^2 over states phi of Schmidt rank <= k,
    which equals the sum of the k largest squared Schmidt coefficients."""
    if psi.n_parties != 2:
        raise ValueError("max_overlap_schmidt_k needs a bipartite state")
    mu = schmidt(psi, Bipartition((0,), (1,))).coefficients
    k = int(k)
    if not 1 <= k <= mu.size:
        raise ValueError(f"k={k} outside 1..{mu.size}")
    return float((mu[:k] ** 2).sum())


def build_W_k(psi: PureFactorState, k: int) -> Witness:
    """Schmidt-number (k+1) witness 1 - P_psi / (sum of k largest mu^2)."""
    if psi.n_parties != 2:
        raise ValueError("build_W_k needs a bipartite state")
    mu = schmidt(psi, Bipartition((0,), (1,))).coefficients
    k = int(k)
    if not 1 <= k < mu.size:
        raise ValueError(f"k={k} must satisfy 1 <= k < Schmidt rank {mu.size}")
    s_k = float((mu[:k] ** 2).sum())
    m = np.eye(psi.dim, dtype=np.complex128) - psi.density() / s_k
    return Witness(m, (psi.party_dims,), "W_k", epsilon=(1.0 - s_k) / s_k, schmidt_k=k)


def apply_map_from_witness(w: Witness | np.ndarray, x, dims: tuple[int, int] | None = None) -> np.ndarray:
    """Apply the linear map isomorphic to an operator: L[X] = Tr_1((X^T (x) 1) W).

    For a ``Witness`` the tensor slots are the sides of its party cut.
    """
    if isinstance(w, Witness):
        m, (da, db) = w.cut_major()
    else:
        m = np.asarray(w, dtype=np.complex128)
        if dims is None:
            raise ValueError("dims=(d1, d2) is required for a raw matrix")
        da, db = dims
        if m.shape != (da * db, da * db):
            raise ValueError("matrix shape does not match dims")
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (da, da):
        raise ValueError(f"input shape {x.shape} does not match the first slot dimension {da}")
    prod = np.kron(x.T, np.eye(db, dtype=np.complex128)) @ m
    return partial_trace(prod, (da, db), keep=[1])


def choi_operator(map_apply, d_in: int, d_out: int) -> np.ndarray:
    """Reassemble d * (id (x) L)[P+] from a map's action on matrix units."""
    w = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for i in range(d_in):
        for j in range(d_in):
            unit = np.zeros((d_in, d_in), dtype=np.complex128)
            unit[i, j] = 1.0
            block = map_apply(unit)
            w[i * d_out : (i + 1) * d_out, j * d_out : (j + 1) * d_out] = block
    return w


def w1_ppt_bound_check(psi: PureFactorState, rho: MixedState, tol: float = 1e-9) -> bool:
    """Verify <psi|rho|psi> <= mu_1^2 + tol on a PPT state.

    The overlap bound is what makes the k = 1 witness blind to every PPT
    state; the state must already be PPT across the bipartite cut.
    """
    if psi.n_parties != 2:
        raise ValueError("w1_ppt_bound_check needs a bipartite reference state")
    cut = Bipartition((0,), (1,))
    if rho.party_shape != psi.party_dims:
        raise ValueError("state and reference party dimensions do not match")
    if not is_ppt(rho, cut):
        raise ValueError("precondition violated: state is not PPT across the cut")
    m, _ = cut_major_matrix(rho, cut)
    vec = psi.amplitudes
    overlap = float((vec.conj() @ m @ vec).real)
    mu1 = float(schmidt(psi, cut).coefficients[0])
    return overlap <= mu1**2 + tol


@dataclass
class NondecomposabilityReport:
    """Constructive evidence that a tensor-extended witness is nondecomposable:
    a verified-PPT state on which it takes a negative expectation."""

    witness: Witness
    state: MixedState
    expectation: float
    inner_expectation: float
    p: float
    p_gamma: float
    state_is_ppt: bool


def nondecomposability_certificate(
    phi: PureFactorState,
    inner: Witness,
    psi_w: PureFactorState,
    p: float,
) -> NondecomposabilityReport:
    """Certify nondecomposability of P_phi (x) inner.

    Preconditions (each reported by name on failure): phi is entangled with
    Schmidt rank at most the inner witness's positivity order k, psi_w
    violates the inner witness, and p stays at or below the PPT threshold of
    the two-factor mixed state built from (phi, psi_w).
    """
    cut = Bipartition((0,), (1,))
    if phi.n_parties != 2 or psi_w.n_parties != 2:
        raise ValueError("precondition failed: phi and psi_w must be bipartite")
    if inner.schmidt_k is None:
        raise ValueError("precondition failed: inner witness carries no Schmidt-positivity order k")
    rank_phi = schmidt(phi, cut).rank
    if rank_phi < 2:
        raise ValueError("precondition failed: phi is not entangled (Schmidt rank 1)")
    if rank_phi > inner.schmidt_k:
        raise ValueError(
            f"precondition failed: Schmidt rank of phi ({rank_phi}) exceeds the inner positivity order k={inner.schmidt_k}"
        )
    inner_expectation = float((psi_w.amplitudes.conj() @ inner.matrix @ psi_w.amplitudes).real)
    if inner_expectation >= 0:
        raise ValueError("precondition failed: psi_w does not violate the inner witness")
    spec = EnsembleSpec((phi, psi_w), float(p))
    threshold = p_gamma_exact(spec, cut)
    if p > threshold.p_gamma + 1e-12:
        raise ValueError(
            f"precondition failed: p={p} exceeds the PPT threshold {threshold.p_gamma:.12g}"
        )
    rho = build_rho_p(spec)
    ppt = is_ppt(rho, cut)
    tensor_w = Witness(
        kron(projector(phi.amplitudes), inner.matrix),
        (phi.party_dims, tuple(inner.party_shape)),
        "tensor",
        epsilon=inner.epsilon,
        schmidt_k=inner.schmidt_k,
    )
    value = expectation(tensor_w, rho)
    return NondecomposabilityReport(
        witness=tensor_w,
        state=rho,
        expectation=value,
        inner_expectation=inner_expectation,
        p=float(p),
        p_gamma=float(threshold.p_gamma),
        state_is_ppt=bool(ppt),
    )
