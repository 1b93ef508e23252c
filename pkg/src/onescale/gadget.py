"""Gadget compiler: target Hamiltonian in, single-strong-scale simulator out.

Pipeline: normalize the target into involutory unit-norm terms with
coefficients r'_i = r_i / (200 * r_scale), solve per-term chain parameters
so each clock's ground-state weight at its coupling site equals r'_i
exactly, then assemble

    H~ = C * sum_i (shifted clock_i)  +  sum_i h_i (x) |t_i><t_i|_i

with the one strong constant C = 4 * N^(2+delta).  Tiled mode additionally
conditions each coupling on |1><1| of a tile qutrit and adds the tiling
Hamiltonian, which makes products of distinct couplings vanish inside the
tile ground space.

Simulator site layout is [target sites..., one clock qudit per term...,
tile qutrits...] in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .bound_state import (
    BoundChainParams,
    ClockSpectrum,
    build_bound_chain,
    chain_spectrum,
    solve_family,
)
from .operator_core import (
    DENSE_THRESHOLD,
    DimensionError,
    HermiticityError,
    MultipartiteOperator,
    SiteSystem,
    embed_local,
    hermiticity_defect,
    spectral_norm,
    zero,
)
from .tiling import ground_signatures, tile_system

NORMALIZATION_FACTOR = 200.0
DEFAULT_DIM_CAP = 2 ** 20
TILED_MAX_TERMS = 6
INVOLUTION_TOL = 1e-10


class PolicyError(RuntimeError):
    """Build refused by a resource policy (dimension cap, tile materialization)."""


# ---------------------------------------------------------------------------
# hermitian involution basis and target normalization
# ---------------------------------------------------------------------------

def involution_basis(d: int) -> list[np.ndarray]:
    """Hermitian d x d matrices squaring to the identity.

    Returns the d diagonal reflections 1 - 2e_i followed by one matrix per
    off-diagonal pair for the real and imaginary directions.  For d >= 3 the
    d^2 matrices form a basis of the hermitian matrices; for d = 2 the four
    returned matrices are all traceless (and the two reflections coincide up
    to sign), so they span only the traceless subspace.
    """
    if d < 2:
        raise DimensionError("local dimension must be >= 2")
    s = 1.0 / math.sqrt(2.0)
    out: list[np.ndarray] = []
    for i in range(d):
        f = np.eye(d)
        f[i, i] = -1.0
        out.append(f)
    for i in range(d):
        for j in range(i + 1, d):
            f = np.eye(d)
            f[i, j] = s
            f[j, i] = s
            f[i, i] = -s
            f[j, j] = s
            out.append(f)
    for i in range(d):
        for j in range(i + 1, d):
            f = np.eye(d, dtype=complex)
            f[i, j] = 1j * s
            f[j, i] = -1j * s
            f[i, i] = -s
            f[j, j] = s
            out.append(f)
    return out


def decompose_involutions(block) -> list[tuple[float, np.ndarray]]:
    """Write a hermitian block as sum of positive multiples of involutions.

    A block that is already proportional to an involution comes back as a
    single pair.  Otherwise the block is solved against involution_basis
    (augmented with the identity at d = 2, where the basis is traceless);
    negative coefficients are absorbed by negating the involution, and
    coefficients below 1e-12 * |block| are dropped.
    """
    block = np.asarray(block)
    defect = hermiticity_defect(block)
    if defect > 1e-12:
        raise HermiticityError(f"block hermiticity defect {defect:.3e}")
    d = block.shape[0]
    nrm = spectral_norm(block)
    if nrm <= 1e-14:
        return []
    unit = block / nrm
    if np.max(np.abs(unit @ unit - np.eye(d))) <= INVOLUTION_TOL:
        return [(float(nrm), unit)]
    basis = involution_basis(d)
    if d == 2:
        basis = basis + [np.eye(2)]
    stacked = np.stack([np.asarray(e, dtype=complex).reshape(-1) for e in basis], axis=1)
    a_real = np.vstack([stacked.real, stacked.imag])
    target = np.asarray(block, dtype=complex).reshape(-1)
    b_real = np.concatenate([target.real, target.imag])
    coef, *_ = np.linalg.lstsq(a_real, b_real, rcond=None)
    recon = sum(c * e for c, e in zip(coef, basis))
    if np.max(np.abs(recon - block)) > INVOLUTION_TOL * max(1.0, nrm):
        raise ValueError("block is outside the span of the involution set")
    out = []
    for c, e in zip(coef, basis):
        if abs(c) <= 1e-12 * nrm:
            continue
        out.append((abs(float(c)), e if c > 0 else -e))
    return out


@dataclass(frozen=True)
class LocalTerm:
    """One interaction: hermitian block on an ordered support with a weight."""

    name: str
    support: tuple[int, ...]
    coefficient: float
    block: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(s) for s in self.support))
        block = np.asarray(self.block)
        defect = hermiticity_defect(block)
        if defect > 1e-12:
            raise HermiticityError(f"term {self.name}: hermiticity defect {defect:.3e}")
        if self.coefficient == 0.0:
            raise ValueError(f"term {self.name}: zero coefficient")
        block = block.copy()
        block.setflags(write=False)
        object.__setattr__(self, "block", block)

    @property
    def op_norm(self) -> float:
        return spectral_norm(self.block)

    @property
    def is_involution(self) -> bool:
        d = self.block.shape[0]
        return bool(np.max(np.abs(self.block @ self.block - np.eye(d))) <= INVOLUTION_TOL)


@dataclass(frozen=True)
class TargetHamiltonian:
    """H_0 = sum_i r_i h_i on a multipartite system.

    ``normalization`` is None for raw targets; after normalize_target it
    records the divisor 200 * r_scale applied to the coefficients, so the
    original operator is normalization * (sum of the stored terms).
    """

    system: SiteSystem
    terms: tuple[LocalTerm, ...]
    normalization: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("a target needs at least one term")
        n_sites = self.system.n_sites
        for t in self.terms:
            if any(s < 0 or s >= n_sites for s in t.support):
                raise DimensionError(f"term {t.name}: support outside the system")
            d = math.prod(self.system.dims[s] for s in t.support)
            if t.block.shape != (d, d):
                raise DimensionError(f"term {t.name}: block does not match its support")

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def r_scale(self) -> float:
        return max(abs(t.coefficient) for t in self.terms)

    @property
    def r_max_ratio(self) -> float:
        coeffs = [abs(t.coefficient) for t in self.terms]
        return max(coeffs) / min(coeffs)

    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms])

    def matrix(self) -> MultipartiteOperator:
        total = zero(self.system)
        for t in self.terms:
            total = total + t.coefficient * embed_local(self.system, t.support, t.block)
        return total


def normalize_target(target: TargetHamiltonian) -> TargetHamiltonian:
    """Rewrite every term as a positive multiple of an involution and rescale.

    Output coefficients are r'_i = r_i / (200 * r_scale) in (0, 1/200], where
    r_scale is the largest coefficient after the involution split, and the
    embedded output equals the input divided by 200 * r_scale.
    """
    if target.normalization is not None:
        return target
    pieces: list[tuple[str, tuple[int, ...], float, np.ndarray]] = []
    for term in target.terms:
        weighted = term.coefficient * np.asarray(term.block)
        parts = decompose_involutions(weighted)
        if not parts:
            raise ValueError(f"term {term.name} vanished during normalization")
        for k, (c, e) in enumerate(parts):
            name = term.name if len(parts) == 1 else f"{term.name}#{k}"
            pieces.append((name, term.support, c, e))
    r_scale = max(c for _, _, c, _ in pieces)
    divisor = NORMALIZATION_FACTOR * r_scale
    terms = tuple(
        LocalTerm(name=name, support=sup, coefficient=c / divisor, block=e)
        for name, sup, c, e in pieces
    )
    return TargetHamiltonian(system=target.system, terms=terms, normalization=divisor)


# ---------------------------------------------------------------------------
# simulator assembly
# ---------------------------------------------------------------------------

def default_strength(n_terms: int, delta: float) -> float:
    return 4.0 * float(n_terms) ** (2.0 + delta)


def _coupling_projector(length: int, site: int) -> np.ndarray:
    p = np.zeros((length, length))
    p[site - 1, site - 1] = 1.0
    return p


_TILE_P1 = np.diag([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class GadgetArtifact:
    """Compiled simulator with its parameters and clock eigendata.

    ``strong`` is C times the shifted clocks on the system+clock layout (no
    tile factor); ``coupling`` and ``simulator`` live on the full layout,
    which is identical to the system+clock layout in tile-free mode.
    """

    mode: str
    delta: float
    c: float
    m: int
    t_max: int
    chain_length: int
    target: TargetHamiltonian
    r_scale: float
    chains: tuple[BoundChainParams, ...]
    spectra: tuple[ClockSpectrum, ...]
    sc_system: SiteSystem
    system: SiteSystem
    strong: MultipartiteOperator
    coupling: MultipartiteOperator
    simulator: MultipartiteOperator
    coupling_supports: tuple[tuple[int, ...], ...]
    zeroed: bool = False

    @property
    def n_terms(self) -> int:
        return self.target.n_terms

    @property
    def d_sys(self) -> int:
        return self.target.system.total_dim

    @property
    def clock_dim(self) -> int:
        return self.chain_length ** self.n_terms

    @property
    def clock_shifts(self) -> tuple[float, ...]:
        return tuple(s.ground_energy for s in self.spectra)

    @property
    def r_primes(self) -> np.ndarray:
        if self.zeroed:
            return np.zeros(self.n_terms)
        return self.target.coefficients()

    @property
    def lambda_plus(self) -> float:
        """Spectral gap of the strong part: C times the smallest clock gap."""
        return self.c * min(s.gap for s in self.spectra)

    def clock_site(self, i: int) -> int:
        return self.target.system.n_sites + i

    def tile_site(self, qutrit: int) -> int:
        if self.mode != "tiled":
            raise ValueError("tile sites exist only in tiled mode")
        return self.target.system.n_sites + self.n_terms + qutrit

    def eta(self, i: int, z: complex) -> complex:
        """Excited-state weight sum_k p_k^2 / (z - mu_k) of clock i, with the
        clock shifted to ground energy 0 and scaled by C."""
        s = self.spectra[i]
        mu = self.c * (s.energies[1:] - s.energies[0])
        p2 = s.overlaps[1:] ** 2
        val = np.sum(p2 / (z - mu))
        return complex(val) if np.iscomplexobj(np.asarray(z)) or isinstance(z, complex) else float(val.real)

    def clock_ground_vector(self) -> np.ndarray:
        return reduce(np.kron, [s.ground_state for s in self.spectra])

    def effective_block(self) -> np.ndarray:
        """Predicted effective Hamiltonian on the bare target space,
        sum_i r'_i h_i = H_0 / (200 * r_scale)."""
        sys_system = self.target.system
        out = np.zeros((self.d_sys, self.d_sys), dtype=complex)
        for rp, term in zip(self.r_primes, self.target.terms):
            out = out + rp * embed_local(sys_system, term.support, term.block).dense()
        if not np.any(out.imag):
            out = out.real
        return out

    def effective_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.effective_block())

    def with_zero_coupling(self) -> "GadgetArtifact":
        """Degenerate variant with the couplings removed (testing hook)."""
        coupling = zero(self.system)
        return replace(self, coupling=coupling, simulator=self.simulator - self.coupling,
                       zeroed=True)


def simulator_dimension(target: TargetHamiltonian, n_terms: int, chain_length: int,
                        mode: str) -> int:
    d = target.system.total_dim * chain_length ** n_terms
    if mode == "tiled":
        d *= 3 ** (n_terms + 2)
    return d


def compile_gadget(target: TargetHamiltonian, delta: float, mode: str = "tile-free",
                   m: int = 4, c_override: float | None = None,
                   dim_cap: int = DEFAULT_DIM_CAP) -> GadgetArtifact:
    """Compile a target into its single-strong-scale simulator.

    The target is normalized internally if needed.  Chain parameters come
    from the shared-length family solver, so every clock has length
    m * t_max and its own (b_i, t_i).  The dimension cap is checked before
    any large allocation; tiled mode is refused above TILED_MAX_TERMS
    interactions because the tile register grows as 3^(N+2).
    """
    if mode not in ("tile-free", "tiled"):
        raise ValueError(f"unknown mode {mode!r}")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    normalized = normalize_target(target)
    n = normalized.n_terms
    if mode == "tiled" and n > TILED_MAX_TERMS:
        raise PolicyError(
            f"tiled mode materializes a 3^{n + 2} tile register; refused for N={n} > {TILED_MAX_TERMS}")
    c = float(c_override) if c_override is not None else default_strength(n, delta)
    if c <= 0:
        raise ValueError("strength constant must be positive")

    family = solve_family(normalized.coefficients().tolist(), m=m)
    chains = family.entries
    length = family.chain_length
    total_dim = simulator_dimension(normalized, n, length, mode)
    if total_dim > dim_cap:
        raise PolicyError(
            f"simulator dimension {total_dim} exceeds the cap {dim_cap}; "
            f"raise the cap explicitly to proceed")

    spectra = tuple(chain_spectrum(p) for p in chains)
    r_scale = normalized.normalization / NORMALIZATION_FACTOR

    sys_dims = normalized.system.dims
    sc_system = SiteSystem(sys_dims + (length,) * n)
    n_sys = len(sys_dims)

    strong = zero(sc_system)
    for i, (params, spec) in enumerate(zip(chains, spectra)):
        shifted = build_bound_chain(params.b, length).dense() - spec.ground_energy * np.eye(length)
        strong = strong + c * embed_local(sc_system, [n_sys + i], shifted)

    if mode == "tiled":
        system = SiteSystem(sys_dims + (length,) * n + (3,) * (n + 2))
    else:
        system = sc_system

    coupling = zero(system)
    supports = []
    for i, (term, params) in enumerate(zip(normalized.terms, chains)):
        block = np.kron(term.block, _coupling_projector(length, params.t_couple))
        support = list(term.support) + [n_sys + i]
        if mode == "tiled":
            block = np.kron(block, _TILE_P1)
            support = support + [n_sys + n + (i + 1)]  # tile qutrit i+1... see below
        supports.append(tuple(support))
        coupling = coupling + embed_local(system, support, block)

    if mode == "tiled":
        simulator = _lift_to_full(strong, system, n + 2) + _tile_part(system, n) + coupling
    else:
        simulator = strong + coupling

    return GadgetArtifact(
        mode=mode, delta=float(delta), c=c, m=m, t_max=family.t_max,
        chain_length=length, target=normalized, r_scale=r_scale,
        chains=chains, spectra=spectra, sc_system=sc_system, system=system,
        strong=strong, coupling=coupling, simulator=simulator,
        coupling_supports=tuple(supports),
    )


def _lift_to_full(op: MultipartiteOperator, full_system: SiteSystem, n_tile: int) -> MultipartiteOperator:
    """Tensor a system+clock operator with the identity on the tile register."""
    tile_dim = 3 ** n_tile
    base = op.matrix
    if sp.issparse(base) or full_system.total_dim > DENSE_THRESHOLD:
        mat = sp.kron(sp.csr_matrix(base), sp.identity(tile_dim), format="csr")
    else:
        mat = np.kron(base, np.eye(tile_dim))
    return MultipartiteOperator(full_system, mat)


def _tile_part(system: SiteSystem, n: int) -> MultipartiteOperator:
    """Tiling Hamiltonian on the trailing tile sites, diagonal on the full space."""
    from .tiling import tiling_diagonal

    sc_dim = system.total_dim // 3 ** (n + 2)
    diag = np.tile(tiling_diagonal(n).astype(float), sc_dim)
    if system.total_dim > DENSE_THRESHOLD:
        mat = sp.diags(diag, format="csr")
    else:
        mat = np.diag(diag)
    return MultipartiteOperator(system, mat)


def predicted_effective(artifact: GadgetArtifact) -> MultipartiteOperator:
    """H_eff = (1/(200 r_scale)) H_0 tensored with the clock ground projector.

    Lives on the system+clock layout; in tiled mode this is the summed
    (tile-dropped) reading of the effective operator.
    """
    eb = artifact.effective_block()
    psi = artifact.clock_ground_vector()
    proj = np.outer(psi, psi)
    if artifact.sc_system.total_dim > DENSE_THRESHOLD:
        mat = sp.kron(sp.csr_matrix(eb), sp.csr_matrix(proj), format="csr")
    else:
        mat = np.kron(eb, proj)
    return MultipartiteOperator(artifact.sc_system, mat)


def coupling_term_op(artifact: GadgetArtifact, i: int) -> MultipartiteOperator:
    """Coupling term i alone, on the system+clock layout (no tile factor)."""
    if not 0 <= i < artifact.n_terms:
        raise DimensionError(f"term index {i} outside 0..{artifact.n_terms - 1}")
    term = artifact.target.terms[i]
    params = artifact.chains[i]
    n_sys = artifact.target.system.n_sites
    block = np.kron(term.block, _coupling_projector(artifact.chain_length, params.t_couple))
    support = list(term.support) + [n_sys + i]
    return embed_local(artifact.sc_system, support, block)


def restricted_block(artifact: GadgetArtifact, i: int) -> MultipartiteOperator:
    """Signature-i block of the tiled simulator: all clocks plus coupling i.

    Within tile ground signature i every coupling j != i is projected out,
    so the block is C * sum_j clock_j + h_i (x) |t_i><t_i|_i on the
    system+clock layout.
    """
    if artifact.mode != "tiled":
        raise ValueError("restricted blocks are defined for tiled artifacts")
    if not 1 <= i <= artifact.n_terms:
        raise DimensionError(f"signature index {i} outside 1..{artifact.n_terms}")
    return artifact.strong + coupling_term_op(artifact, i - 1)


def signature_block_indices(artifact: GadgetArtifact, i: int) -> np.ndarray:
    """Full-layout basis indices of (system+clock) x |signature i>."""
    if artifact.mode != "tiled":
        raise ValueError("signature indices exist only in tiled mode")
    n = artifact.n_terms
    sig = ground_signatures(n)[i - 1]
    tile_idx = tile_system(n).basis_index(sig.digits)
    tile_dim = 3 ** (n + 2)
    sc_dim = artifact.sc_system.total_dim
    return np.arange(sc_dim, dtype=np.int64) * tile_dim + tile_idx


# ---------------------------------------------------------------------------
# structured low/high split of the strong part
# ---------------------------------------------------------------------------

def clock_excited_products(artifact: GadgetArtifact) -> tuple[np.ndarray, np.ndarray]:
    """All product eigenvectors of the strong part with >= 1 clock excited.

    Returns (basis, energies): columns are kron products of per-chain
    eigenvectors over excitation tuples k != (0,...,0), ordered by energy
    then lexicographic tuple; energies are C * sum_i (mu_{k_i} - mu_{0,i}).
    """
    n = artifact.n_terms
    length = artifact.chain_length
    specs = artifact.spectra
    shifted = [s.energies - s.energies[0] for s in specs]
    tuples = [k for k in np.ndindex(*(length,) * n) if any(k)]
    energies = np.array([artifact.c * sum(shifted[i][k[i]] for i in range(n)) for k in tuples])
    order = sorted(range(len(tuples)), key=lambda j: (energies[j], tuples[j]))
    cols = []
    for j in order:
        k = tuples[j]
        vec = reduce(np.kron, [specs[i].eigenvectors[:, k[i]] for i in range(n)])
        cols.append(vec)
    return np.column_stack(cols), energies[order]


def structured_projector_pair(artifact: GadgetArtifact):
    """ProjectorPair for the strong part with an analytically known split.

    The minus basis is identity_sys (x) clock ground product (so minus-block
    matrices are written directly in the bare target basis); the plus basis
    is identity_sys (x) excited clock products.  Returns (pair, lambda_plus)
    where lambda_plus holds the strong-part eigenvalue of each plus column.
    """
    from .operator_core import ProjectorPair

    d_sys = artifact.d_sys
    psi0 = artifact.clock_ground_vector()
    w, mu = clock_excited_products(artifact)
    minus = np.kron(np.eye(d_sys), psi0[:, None])
    plus = np.kron(np.eye(d_sys), w)
    lam = np.tile(mu, d_sys)
    return ProjectorPair(minus, plus), lam
