"""Pure factor states, Schmidt decompositions, and the mixed family they generate.

The central construction mixes a separable tensor part with a pure product of
factor states: for factors psi_1..psi_M of total dimensions D_1..D_M,

    rho_p = (1 - p) * (x)_i (1 - P_i) / (D_i - 1)  +  p * (x)_i P_i

stored in factor-major layout (factor 0 slowest, parties inside each factor
ordered as given).  Cut-major views for the entanglement criteria are produced
on demand by subsystem permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cuts import Bipartition
from .tensor import (
    DEFAULT_DIM_CAP,
    DimensionCapExceeded,
    kron_all,
    permute_vector,
    projector,
)

SCHMIDT_RANK_TOL = 1e-9


@dataclass(frozen=True)
class PureFactorState:
    """A normalized pure state of N >= 2 parties with the given local dimensions."""

    party_dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.party_dims)
        object.__setattr__(self, "party_dims", dims)
        if len(dims) < 2:
            raise ValueError("a factor state needs at least 2 parties")
        if any(d < 1 for d in dims):
            raise ValueError(f"party dimensions must be >= 1, got {dims}")
        amps = np.ascontiguousarray(np.asarray(self.amplitudes, dtype=np.complex128)).reshape(-1)
        if amps.size != self.dim:
            raise ValueError(f"amplitude length {amps.size} != product of dims {self.dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"amplitudes not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_parties(self) -> int:
        return len(self.party_dims)

    @property
    def dim(self) -> int:
        out = 1
        for d in self.party_dims:
            out *= d
        return out

    def density(self) -> np.ndarray:
        return projector(self.amplitudes)


def pure_state(party_dims: Sequence[int], amplitudes, normalize: bool = False) -> PureFactorState:
    """Build a PureFactorState, optionally normalizing the amplitude vector."""
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if normalize:
        norm = np.linalg.norm(amps)
        if norm < 1e-300:
            raise ValueError("cannot normalize a zero amplitude vector")
        amps = amps / norm
    return PureFactorState(tuple(party_dims), amps)


@dataclass
class SchmidtDecomposition:
    """Schmidt data of a pure state across one cut.

    ``coefficients`` are the descending singular values above the rank cutoff;
    basis arrays hold one orthonormal vector per column.
    """

    coefficients: np.ndarray
    rank: int
    left_basis: np.ndarray
    right_basis: np.ndarray


def _cut_axes(psi: PureFactorState, cut: Bipartition) -> tuple[list[int], list[int]]:
    if cut.n_parties != psi.n_parties:
        raise ValueError(f"cut over {cut.n_parties} parties applied to a {psi.n_parties}-party state")
    return list(cut.side_a), list(cut.side_b)


def cut_matrix(psi: PureFactorState, cut: Bipartition) -> np.ndarray:
    """Amplitudes reshaped to a (dim side A) x (dim side B) matrix."""
    side_a, side_b = _cut_axes(psi, cut)
    tensor = psi.amplitudes.reshape(psi.party_dims)
    t = tensor.transpose(side_a + side_b)
    da = int(np.prod([psi.party_dims[i] for i in side_a]))
    return np.ascontiguousarray(t.reshape(da, -1))


def schmidt(psi: PureFactorState, cut: Bipartition, rank_tol: float = SCHMIDT_RANK_TOL) -> SchmidtDecomposition:
    """Schmidt decomposition of ``psi`` across ``cut`` via SVD of the reshaped amplitudes."""
    mat = cut_matrix(psi, cut)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    rank = int((s > rank_tol).sum())
    # columns of right_basis are the kets v_s with amplitudes = rows of vh,
    # so that amplitudes == sum_s mu_s kron(left[:, s], right[:, s])
    return SchmidtDecomposition(
        coefficients=np.ascontiguousarray(s[:rank]),
        rank=rank,
        left_basis=np.ascontiguousarray(u[:, :rank]),
        right_basis=np.ascontiguousarray(vh[:rank, :].T),
    )


def schmidt_coefficients(psi: PureFactorState, cut: Bipartition | None = None) -> np.ndarray:
    """Descending Schmidt coefficients; bipartite states default to their only cut."""
    if cut is None:
        if psi.n_parties != 2:
            raise ValueError("cut is required for states with more than 2 parties")
        cut = Bipartition((0,), (1,))
    return schmidt(psi, cut).coefficients


# ---------------------------------------------------------------------------
# named state families
# ---------------------------------------------------------------------------


def max_ent(d: int) -> PureFactorState:
    """Maximally entangled state on a d x d pair: sum_i |ii> / sqrt(d)."""
    d = int(d)
    if d < 2:
        raise ValueError("max_ent needs d >= 2")
    amps = np.zeros(d * d, dtype=np.complex128)
    amps[:: d + 1] = 1.0 / np.sqrt(d)
    return PureFactorState((d, d), amps)


def ghz(dims: Sequence[int]) -> PureFactorState:
    """Generalized GHZ state sum_k |k...k> over the smallest local dimension."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2 or min(dims) < 2:
        raise ValueError("ghz needs >= 2 parties of local dimension >= 2")
    levels = min(dims)
    amps = np.zeros(dims, dtype=np.complex128)
    for k in range(levels):
        amps[(k,) * len(dims)] = 1.0
    return pure_state(dims, amps.reshape(-1), normalize=True)


def w_state(n: int) -> PureFactorState:
    """W state of n qubits: equal superposition of single-excitation strings."""
    n = int(n)
    if n < 2:
        raise ValueError("w_state needs n >= 2")
    amps = np.zeros(2**n, dtype=np.complex128)
    for i in range(n):
        amps[1 << (n - 1 - i)] = 1.0
    return pure_state((2,) * n, amps, normalize=True)


def schmidt_state(coeffs: Sequence[float]) -> PureFactorState:
    """Bipartite state sum_i mu_i |ii> built from a positive coefficient vector."""
    mu = np.asarray(coeffs, dtype=np.float64).reshape(-1)
    if mu.size < 1 or np.any(mu < 0):
        raise ValueError("schmidt coefficients must be non-negative")
    norm = np.linalg.norm(mu)
    if norm < 1e-300:
        raise ValueError("cannot normalize a zero coefficient vector")
    mu = np.sort(mu / norm)[::-1]
    d = mu.size
    amps = np.zeros(d * d, dtype=np.complex128)
    amps[:: d + 1] = mu
    return PureFactorState((d, d), amps)


def build_named(kind: str, **params) -> PureFactorState:
    """Dispatch on a named family: max_ent | ghz | w | schmidt."""
    if kind == "max_ent":
        return max_ent(params["d"])
    if kind == "ghz":
        return ghz(params["dims"])
    if kind == "w":
        return w_state(params["n"])
    if kind == "schmidt":
        return schmidt_state(params["coeffs"])
    raise ValueError(f"unknown named state kind {kind!r}")


def random_pure(party_dims: Sequence[int], seed: int) -> PureFactorState:
    """Haar-like random pure state from normalized i.i.d. complex Gaussians."""
    dims = tuple(int(d) for d in party_dims)
    rng = np.random.default_rng(seed)
    n = int(np.prod(dims))
    amps = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return pure_state(dims, amps, normalize=True)


def random_product(party_dims: Sequence[int], seed: int) -> PureFactorState:
    """Random product state: an independent random pure vector per party."""
    dims = tuple(int(d) for d in party_dims)
    rng = np.random.default_rng(seed)
    parts = []
    for d in dims:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        parts.append(v / np.linalg.norm(v))
    amps = parts[0]
    for v in parts[1:]:
        amps = np.kron(amps, v)
    return pure_state(dims, amps)


# ---------------------------------------------------------------------------
# the mixed family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSpec:
    """M factor states sharing a party count, plus the mixing parameter p."""

    factors: tuple[PureFactorState, ...]
    p: float

    def __post_init__(self):
        factors = tuple(self.factors)
        object.__setattr__(self, "factors", factors)
        if len(factors) < 1:
            raise ValueError("an ensemble needs at least one factor state")
        n = factors[0].n_parties
        if any(f.n_parties != n for f in factors):
            raise ValueError("all factor states must share the same party count")
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"mixing parameter p={p} outside [0, 1]")
        object.__setattr__(self, "p", p)
        for f in factors:
            if f.dim < 2:
                raise ValueError("factor states of total dimension 1 are not allowed")

    @property
    def n_parties(self) -> int:
        return self.factors[0].n_parties

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    @property
    def dim(self) -> int:
        out = 1
        for f in self.factors:
            out *= f.dim
        return out

    def normalizations(self) -> tuple[float, ...]:
        """Per-factor separable-part normalizations 1 / (D_i - 1)."""
        return tuple(1.0 / (f.dim - 1) for f in self.factors)

    def with_p(self, p: float) -> "EnsembleSpec":
        return EnsembleSpec(self.factors, p)


@dataclass
class MixedState:
    """Density matrix in factor-major layout plus its subsystem grid.

    ``factor_party_dims[i][j]`` is the dimension party j contributes to
    factor i; the fine-grained subsystem order of ``matrix`` is
    (factor 0 party 0, factor 0 party 1, ..., factor 1 party 0, ...).
    """

    matrix: np.ndarray
    factor_party_dims: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        grid = tuple(tuple(int(d) for d in row) for row in self.factor_party_dims)
        self.factor_party_dims = grid
        n = len(grid[0])
        if any(len(row) != n for row in grid):
            raise ValueError("all factors must have the same party count")
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.complex128))
        dim = int(np.prod([d for row in grid for d in row]))
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} != grid dimension {dim}")
        if abs(np.trace(m) - 1.0) > 1e-12:
            raise ValueError("density matrix must have unit trace")
        if float(np.abs(m - m.conj().T).max()) > 1e-10:
            raise ValueError("density matrix must be Hermitian")
        self.matrix = m

    @property
    def n_parties(self) -> int:
        return len(self.factor_party_dims[0])

    @property
    def n_factors(self) -> int:
        return len(self.factor_party_dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def party_shape(self) -> tuple[int, ...]:
        """Dimension of each composite party (product over factors)."""
        n = self.n_parties
        return tuple(int(np.prod([row[j] for row in self.factor_party_dims])) for j in range(n))

    @property
    def factor_shape(self) -> tuple[int, ...]:
        """Total dimension of each factor."""
        return tuple(int(np.prod(row)) for row in self.factor_party_dims)

    @classmethod
    def from_pure(cls, psi: PureFactorState) -> "MixedState":
        return cls(psi.density(), (psi.party_dims,))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)[0])


def fine_dims(grid: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Flat factor-major subsystem dimension list of a grid."""
    return tuple(int(d) for row in grid for d in row)


def cut_permutation(grid: Sequence[Sequence[int]], cut: Bipartition) -> list[int]:
    """Axis order moving side-A subsystems (factor-major) ahead of side-B."""
    n = len(grid[0])
    if cut.n_parties != n:
        raise ValueError(f"cut over {cut.n_parties} parties applied to a {n}-party system")
    axes_a = [f * n + p for f in range(len(grid)) for p in range(n) if p in cut.side_a]
    axes_b = [f * n + p for f in range(len(grid)) for p in range(n) if p in cut.side_b]
    return axes_a + axes_b


def cut_dims(grid: Sequence[Sequence[int]], cut: Bipartition) -> tuple[int, int]:
    """(side A, side B) dimensions of a cut."""
    da = 1
    db = 1
    for f, row in enumerate(grid):
        for p, d in enumerate(row):
            if p in cut.side_a:
                da *= d
            else:
                db *= d
    return da, db


def cut_major_matrix(state: MixedState, cut: Bipartition) -> tuple[np.ndarray, tuple[int, int]]:
    """Permute the density matrix so the cut's side A indexes first."""
    grid = state.factor_party_dims
    dims = fine_dims(grid)
    perm = cut_permutation(grid, cut)
    from .tensor import permute_systems

    return permute_systems(state.matrix, dims, perm), cut_dims(grid, cut)


def cut_major_vector(amplitudes: np.ndarray, grid: Sequence[Sequence[int]], cut: Bipartition) -> np.ndarray:
    """Permute a factor-major product vector into cut-major order."""
    dims = fine_dims(grid)
    perm = cut_permutation(grid, cut)
    return permute_vector(amplitudes, dims, perm)


def build_rho_p(spec: EnsembleSpec, dim_cap: int = DEFAULT_DIM_CAP) -> MixedState:
    """Assemble the mixed family state for an ensemble, in factor-major layout."""
    if spec.dim > dim_cap:
        raise DimensionCapExceeded(spec.dim, dim_cap)
    sep_blocks = []
    proj_blocks = []
    for f, norm in zip(spec.factors, spec.normalizations()):
        p_f = f.density()
        sep_blocks.append((np.eye(f.dim, dtype=np.complex128) - p_f) * norm)
        proj_blocks.append(p_f)
    rho = (1.0 - spec.p) * kron_all(sep_blocks) + spec.p * kron_all(proj_blocks)
    grid = tuple(f.party_dims for f in spec.factors)
    return MixedState(rho, grid)


def ensemble_product_vector(spec: EnsembleSpec) -> np.ndarray:
    """Factor-major amplitudes of the pure part (x)_i psi_i."""
    amps = spec.factors[0].amplitudes
    for f in spec.factors[1:]:
        amps = np.kron(amps, f.amplitudes)
    return amps
