"""Multipartite hermitian operators and their spectral machinery.

Conventions used throughout the package:

* Site ordering is site-0-major: the basis index of a product state
  ``|i_0, i_1, ..., i_{n-1}>`` is ``i_0*(d_1*...*d_{n-1}) + i_1*(d_2*...) + ...``,
  i.e. operators embed via ``kron(op_site0, op_site1, ...)``.
* Operator storage switches from dense ndarray to CSR above
  ``DENSE_THRESHOLD`` total dimension.
* Eigenvectors follow the sign convention "first component of magnitude
  above cutoff is real and >= 0"; real-symmetric input yields real
  eigenvectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

HERMITICITY_TOL = 1e-12
DENSE_THRESHOLD = 4096
DENSE_EIGH_LIMIT = 16384


class DimensionError(ValueError):
    """Shape or site-index mismatch."""


class HermiticityError(ValueError):
    """Matrix deviates from its adjoint beyond tolerance."""


class SpectralGapError(RuntimeError):
    """No spectral gap of the requested size was found."""


class SingularBlockError(RuntimeError):
    """A block that must be inverted is (near-)singular."""


@dataclass(frozen=True)
class SiteSystem:
    """Layout of a multipartite Hilbert space: per-site local dimensions."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise DimensionError("a SiteSystem needs at least one site")
        if any(d < 2 for d in dims):
            raise DimensionError(f"every local dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def place_values(self) -> np.ndarray:
        """Site-0-major place value of each site's digit in the basis index."""
        pv = np.ones(len(self.dims), dtype=np.int64)
        for s in range(len(self.dims) - 2, -1, -1):
            pv[s] = pv[s + 1] * self.dims[s + 1]
        return pv

    def basis_index(self, digits) -> int:
        """Basis index of the product state with the given per-site digits."""
        if len(digits) != self.n_sites:
            raise DimensionError("one digit per site required")
        pv = self.place_values()
        return int(sum(int(d) * int(p) for d, p in zip(digits, pv)))


def is_sparse(matrix) -> bool:
    return sp.issparse(matrix)


def hermiticity_defect(matrix) -> float:
    """Largest entrywise deviation |A - A^dagger|."""
    diff = matrix - matrix.conj().T
    if is_sparse(diff):
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    return float(np.max(np.abs(diff))) if diff.size else 0.0


@dataclass(frozen=True)
class MultipartiteOperator:
    """Hermitian operator on a SiteSystem.

    The matrix is dense (ndarray) or CSR depending on size; treat it as
    immutable.  Hermiticity is enforced at construction to
    ``HERMITICITY_TOL`` entrywise.
    """

    system: SiteSystem
    matrix: object  # ndarray or CSR matrix

    def __post_init__(self):
        m = self.matrix
        n = self.system.total_dim
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} != system dim {n}")
        defect = hermiticity_defect(m)
        if defect > HERMITICITY_TOL:
            raise HermiticityError(f"hermiticity defect {defect:.3e} > {HERMITICITY_TOL}")
        if is_sparse(m):
            object.__setattr__(self, "matrix", m.tocsr())
        else:
            m = np.asarray(m)
            if np.iscomplexobj(m) and not np.any(m.imag):
                m = m.real.copy()
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.system.total_dim

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if is_sparse(self.matrix) else self.matrix

    def norm2(self) -> float:
        """Spectral norm."""
        return spectral_norm(self.matrix)

    def __add__(self, other: "MultipartiteOperator") -> "MultipartiteOperator":
        if other.system != self.system:
            raise DimensionError("operators live on different systems")
        return MultipartiteOperator(self.system, self.matrix + other.matrix)

    def __sub__(self, other: "MultipartiteOperator") -> "MultipartiteOperator":
        if other.system != self.system:
            raise DimensionError("operators live on different systems")
        return MultipartiteOperator(self.system, self.matrix - other.matrix)

    def __rmul__(self, scalar: float) -> "MultipartiteOperator":
        return MultipartiteOperator(self.system, float(scalar) * self.matrix)


def identity(system: SiteSystem) -> MultipartiteOperator:
    n = system.total_dim
    mat = sp.identity(n, format="csr") if n > DENSE_THRESHOLD else np.eye(n)
    return MultipartiteOperator(system, mat)


def zero(system: SiteSystem) -> MultipartiteOperator:
    n = system.total_dim
    mat = sp.csr_matrix((n, n)) if n > DENSE_THRESHOLD else np.zeros((n, n))
    return MultipartiteOperator(system, mat)


def spectral_norm(matrix, tol: float = 1e-12, max_iter: int = 10000) -> float:
    """2-norm; exact for small dense blocks, power iteration otherwise.

    The power iteration uses a fixed deterministic start vector, so repeated
    calls on the same input give the same value.
    """
    n = matrix.shape[0]
    if not is_sparse(matrix) and n <= 1024:
        if hermiticity_defect(matrix) <= 1e-10:
            return float(np.max(np.abs(np.linalg.eigvalsh(matrix))))
        return float(np.linalg.norm(matrix, 2))
    v = np.ones(n) + 1e-3 * np.arange(n) / n
    v /= np.linalg.norm(v)
    mh = matrix.conj().T
    last = 0.0
    for _ in range(max_iter):
        w = mh @ (matrix @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        est = math.sqrt(nw)
        if abs(est - last) <= tol * max(est, 1.0):
            return est
        last = est
    return last


def embed_local(system: SiteSystem, support, block) -> MultipartiteOperator:
    """Embed a hermitian block acting on `support` sites, identity elsewhere.

    `support` is an ordered list of distinct site indices; the k-th tensor
    factor of `block` acts on site support[k].
    """
    support = [int(s) for s in support]
    n_sites = system.n_sites
    if len(set(support)) != len(support):
        raise DimensionError(f"support indices must be distinct, got {support}")
    if any(s < 0 or s >= n_sites for s in support):
        raise DimensionError(f"support {support} out of range for {n_sites} sites")
    block = np.asarray(block)
    d_block = math.prod(system.dims[s] for s in support)
    if block.shape != (d_block, d_block):
        raise DimensionError(
            f"block shape {block.shape} != supported dimension {d_block}")
    defect = hermiticity_defect(block)
    if defect > HERMITICITY_TOL:
        raise HermiticityError(f"block hermiticity defect {defect:.3e}")

    total = system.total_dim
    rest = [s for s in range(n_sites) if s not in support]
    rest_dim = math.prod(system.dims[s] for s in rest) if rest else 1

    use_sparse = total > DENSE_THRESHOLD
    if use_sparse:
        src = sp.kron(sp.csr_matrix(block), sp.identity(rest_dim), format="csr")
    else:
        src = np.kron(block, np.eye(rest_dim))

    order = support + rest
    if order == list(range(n_sites)):
        return MultipartiteOperator(system, src)

    # permutation from full (site-0-major) index to the source ordering
    pv_full = system.place_values()
    idx = np.arange(total, dtype=np.int64)
    digits = [(idx // pv_full[s]) % system.dims[s] for s in range(n_sites)]
    dims_src = [system.dims[s] for s in order]
    pv_src = np.ones(n_sites, dtype=np.int64)
    for k in range(n_sites - 2, -1, -1):
        pv_src[k] = pv_src[k + 1] * dims_src[k + 1]
    sigma = np.zeros(total, dtype=np.int64)
    for k, s in enumerate(order):
        sigma += digits[s] * pv_src[k]

    if use_sparse:
        mat = src.tocsr()[sigma].tocsc()[:, sigma].tocsr()
    else:
        mat = src[np.ix_(sigma, sigma)]
    return MultipartiteOperator(system, mat)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Full eigendecomposition, eigenvalues ascending, orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_tol: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_eigenvector_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the first component above cutoff of each column real and >= 0."""
    vectors = np.array(vectors)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        mags = np.abs(col)
        cutoff = 1e-12 * (mags.max() or 1.0)
        nz = np.nonzero(mags > cutoff)[0]
        if len(nz) == 0:
            continue
        pivot = col[nz[0]]
        phase = pivot / abs(pivot)
        vectors[:, j] = col / phase
    if np.iscomplexobj(vectors) and not np.any(vectors.imag):
        vectors = vectors.real
    return vectors


def _lexsort_degenerate(evals: np.ndarray, vectors: np.ndarray, tol: float):
    """Deterministic order inside degenerate clusters.

    Eigenvalue stays the primary key (ascending order is never disturbed);
    exactly tied eigenvalues are broken lexicographically by the rounded
    vector entries.
    """
    order = np.arange(len(evals))
    start = 0
    while start < len(evals):
        stop = start + 1
        while stop < len(evals) and evals[stop] - evals[start] <= tol:
            stop += 1
        if stop - start > 1:
            keys = np.round(vectors[:, start:stop].T.real, 12)
            sub = sorted(range(stop - start),
                         key=lambda j: (evals[start + j], tuple(keys[j])))
            order[start:stop] = order[start:stop][sub]
        start = stop
    return evals[order], vectors[:, order]


def eigh(op: MultipartiteOperator, degeneracy_tol: float | None = None) -> SpectralDecomposition:
    """Full hermitian eigendecomposition with a deterministic ordering."""
    n = op.dim
    if is_sparse(op.matrix):
        if n > DENSE_EIGH_LIMIT:
            raise DimensionError(
                f"dense eigendecomposition refused at dim {n} > {DENSE_EIGH_LIMIT}")
        mat = op.dense()
    else:
        mat = op.matrix
    try:
        evals, vecs = sla.eigh(mat, check_finite=False)
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise RuntimeError(f"eigendecomposition failed to converge: {exc}") from exc
    norm = float(np.max(np.abs(evals))) if len(evals) else 0.0
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9 * (norm or 1.0)
    vecs = _fix_eigenvector_signs(vecs)
    evals, vecs = _lexsort_degenerate(evals, vecs, degeneracy_tol)
    return SpectralDecomposition(evals, vecs, degeneracy_tol)


@dataclass(frozen=True)
class ProjectorPair:
    """Orthonormal bases of a designated low subspace and its complement."""

    minus_basis: np.ndarray  # (n, k)
    plus_basis: np.ndarray   # (n, n-k)

    @property
    def dim(self) -> int:
        return self.minus_basis.shape[0]

    @property
    def minus_rank(self) -> int:
        return self.minus_basis.shape[1]

    @property
    def minus(self) -> np.ndarray:
        u = self.minus_basis
        return u @ u.conj().T

    @property
    def plus(self) -> np.ndarray:
        u = self.plus_basis
        return u @ u.conj().T


def ground_space_projector(dec: SpectralDecomposition, gap_tol: float) -> ProjectorPair:
    """Split into the lowest eigenvalue cluster and its complement.

    The cluster collects every eigenvalue within ``degeneracy_tol`` of the
    minimum; a spectral gap of at least ``gap_tol`` above the cluster is
    required, otherwise SpectralGapError is raised.
    """
    evals = dec.eigenvalues
    k = int(np.searchsorted(evals, evals[0] + dec.degeneracy_tol, side="right"))
    if k >= len(evals):
        raise SpectralGapError("entire spectrum lies in one degenerate cluster")
    gap = evals[k] - evals[k - 1]
    if gap < gap_tol:
        raise SpectralGapError(
            f"gap {gap:.3e} above the ground cluster is below gap_tol {gap_tol:.3e}")
    return ProjectorPair(dec.eigenvectors[:, :k], dec.eigenvectors[:, k:])


@dataclass(frozen=True)
class Blocks:
    """The four blocks of an operator in a ProjectorPair basis."""

    minus: np.ndarray
    plus: np.ndarray
    minus_plus: np.ndarray
    plus_minus: np.ndarray


def block_restrict(op: MultipartiteOperator, proj: ProjectorPair) -> Blocks:
    """Blocks (A_-, A_+, A_-+, A_+-) of `op` in the pair's bases."""
    if proj.dim != op.dim:
        raise DimensionError("projector pair dimension does not match operator")
    um, up = proj.minus_basis, proj.plus_basis
    a = op.matrix
    aum = a @ um
    aup = a @ up
    return Blocks(
        minus=um.conj().T @ aum,
        plus=up.conj().T @ aup,
        minus_plus=um.conj().T @ aup,
        plus_minus=up.conj().T @ aum,
    )


def schur_lower_right(blocks: Blocks, z: complex) -> np.ndarray:
    """Schur complement of (z*1 - A) onto the minus block.

    Returns (z*1_- - A_-) - A_-+ (z*1_+ - A_+)^{-1} A_+-, which equals the
    inverse of the minus block of (z*1 - A)^{-1}.
    """
    kp = blocks.plus.shape[0]
    km = blocks.minus.shape[0]
    m_plus = z * np.eye(kp) - blocks.plus
    smallest = sla.svdvals(m_plus)[-1] if kp else 1.0
    if smallest <= 1e-10:
        raise SingularBlockError(
            f"plus block of (z - A) is near singular (sigma_min = {smallest:.3e})")
    if kp == 0:
        return z * np.eye(km) - blocks.minus
    x = sla.solve(m_plus, blocks.plus_minus)
    return z * np.eye(km) - blocks.minus - blocks.minus_plus @ x
