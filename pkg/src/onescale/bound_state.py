"""Biased-chain (clock) Hamiltonians with a tunable bound-state overlap.

The chain operator is a path-graph Laplacian on L nodes minus a bonus of
strength b on the first node.  For b > 0 it has a unique negative-energy
ground state whose amplitude falls off like (b+1)^{-t} along the chain, so
the weight |<Psi_0|t>|^2 at a chosen coupling site can be dialed to any
small value by picking (b, t, chain length).  ``solve_params`` inverts that
relation exactly by bisecting on the diagonalized overlap.

Two labelling conventions for the same operator family appear in practice:
sites 1..L with bonus b on site 1 (used here), and sites 0..L-1 with bonus
b+1 on site 0.  ``biased_clock`` builds the latter; the two satisfy
``biased_clock(b, L) == build_bound_chain(b + 1, L)`` entrywise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .operator_core import (
    DimensionError,
    MultipartiteOperator,
    SiteSystem,
    embed_local,
)

OVERLAP_RTOL = 1e-12
R_MAX = 1.0 / 100.0


class SolverError(RuntimeError):
    """No chain parameters achieve the requested overlap."""


def chain_diagonals(bias: float, length: int) -> tuple[np.ndarray, np.ndarray]:
    """(diagonal, off-diagonal) of the tridiagonal chain matrix."""
    if length < 2:
        raise DimensionError("chain length must be >= 2")
    if bias <= 0:
        raise ValueError(f"bias must be positive, got {bias}")
    diag = np.full(length, 2.0)
    diag[0] = 1.0 - bias
    diag[-1] = 1.0
    off = np.full(length - 1, -1.0)
    return diag, off


def build_bound_chain(bias: float, length: int) -> MultipartiteOperator:
    """Path-graph Laplacian on `length` nodes minus bias*|1><1| (sites 1..L)."""
    diag, off = chain_diagonals(bias, length)
    mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return MultipartiteOperator(SiteSystem((length,)), mat)


def biased_clock(bias: float, length: int) -> MultipartiteOperator:
    """Convention with sites 0..L-1 and bonus (bias+1) on site 0."""
    return build_bound_chain(bias + 1.0, length)


def ansatz_state(bias: float, length: int) -> np.ndarray:
    """Unit-norm geometric ansatz A*(b+1)^{-t}, t = 1..length."""
    if bias <= 0:
        raise ValueError("bias must be positive")
    b = float(bias)
    a2 = b * (2.0 + b) / (1.0 - (b + 1.0) ** (-2 * length))
    t = np.arange(1, length + 1)
    return math.sqrt(a2) * (b + 1.0) ** (-t.astype(float))


def predicted_overlap(bias: float, site: int) -> float:
    """Leading-order squared ground-state amplitude at `site`."""
    b = float(bias)
    return b * (b + 2.0) / (b + 1.0) ** (2 * site)


@dataclass(frozen=True)
class BoundChainParams:
    """Bias b, coupling site t_couple, length multiplier m, chain length."""

    b: float
    t_couple: int
    m: int
    length: int = 0  # defaults to m * t_couple

    def __post_init__(self):
        if self.length == 0:
            object.__setattr__(self, "length", self.m * self.t_couple)
        if self.b <= 0:
            raise ValueError(f"bias must be positive, got {self.b}")
        if self.m <= 3:
            raise ValueError(f"length multiplier must exceed 3, got {self.m}")
        if self.t_couple < 2:
            raise ValueError(f"coupling site must be >= 2, got {self.t_couple}")
        if self.length < self.t_couple:
            raise ValueError("chain shorter than its coupling site")


def _ground_state(bias: float, length: int) -> tuple[float, np.ndarray]:
    diag, off = chain_diagonals(bias, length)
    w, v = sla.eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    vec = v[:, 0]
    if vec[0] < 0:
        vec = -vec
    return float(w[0]), vec


@dataclass(frozen=True)
class ClockSpectrum:
    """Full eigensystem of a chain plus overlaps with the coupling site.

    energies are ascending; overlaps[k] = <t_couple|Psi_k> (real).  The
    penalized vector sum_{k>0} Psi_k <Psi_k|t_couple> is exposed as a
    property.  Energies are raw (unshifted) chain eigenvalues.
    """

    params: BoundChainParams
    energies: np.ndarray
    eigenvectors: np.ndarray
    overlaps: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def penalized_vector(self) -> np.ndarray:
        return self.eigenvectors[:, 1:] @ self.overlaps[1:]

    def shifted_energies(self, scale: float = 1.0) -> np.ndarray:
        """Energies with the ground level moved to zero, then scaled."""
        return scale * (self.energies - self.energies[0])


def chain_spectrum(params: BoundChainParams) -> ClockSpectrum:
    diag, off = chain_diagonals(params.b, params.length)
    w, v = sla.eigh_tridiagonal(diag, off)
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    # fix signs so every overlap entry is reproducible and p_0 > 0
    site = params.t_couple - 1
    for k in range(v.shape[1]):
        col = v[:, k]
        pivot = col[np.argmax(np.abs(col) > 1e-12 * np.max(np.abs(col)))]
        if pivot < 0:
            v[:, k] = -col
    if v[site, 0] < 0:
        v[:, 0] = -v[:, 0]
    return ClockSpectrum(params, w, v, v[site, :].copy())


@dataclass(frozen=True)
class OverlapReport:
    exact: float
    predicted: float
    residual_norm: float

    @property
    def relative_error(self) -> float:
        return abs(self.exact - self.predicted) / self.predicted


def exact_overlap(params: BoundChainParams, site: int) -> OverlapReport:
    """Squared ground-state amplitude at `site` from exact diagonalization."""
    if site < 1 or site > params.length:
        raise DimensionError(f"site {site} outside chain 1..{params.length}")
    diag, off = chain_diagonals(params.b, params.length)
    w = sla.eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                             select_range=(0, 1))
    if w[1] - w[0] < 1e-12:
        raise SolverError("degenerate ground state reported by the eigensolver")
    _, vec = _ground_state(params.b, params.length)
    exact = float(vec[site - 1] ** 2)
    ansatz = ansatz_state(params.b, params.length)
    residual = min(np.linalg.norm(vec - ansatz), np.linalg.norm(vec + ansatz))
    return OverlapReport(exact, predicted_overlap(params.b, site), float(residual))


def t_bracket(r: float) -> tuple[float, float]:
    """Sorted endpoints of the coupling-site search interval for target r."""
    ends = (math.log(3.0 / r) / math.log(4.0), math.log(15.0 / r) / math.log(16.0))
    return (min(ends), max(ends))


def _candidate_sites(r: float, cap: int | None = None) -> list[int]:
    """Integer coupling sites to try: bracket integers descending, then one
    step beyond each end."""
    lo, hi = t_bracket(r)
    cands = list(range(math.floor(hi), math.ceil(lo) - 1, -1))
    cands.append(math.floor(hi) + 1)
    cands.append(math.ceil(lo) - 1)
    out = []
    for t in cands:
        if t < 2:
            continue
        if cap is not None and t > cap:
            continue
        if t not in out:
            out.append(t)
    return out


def _site_overlap(bias: float, length: int, site: int) -> float:
    _, vec = _ground_state(bias, length)
    return float(vec[site - 1] ** 2)


def _bisect_bias(r: float, length: int, site: int, b_lo: float, b_hi: float) -> float | None:
    """Bias achieving overlap r at `site`, or None if no sign change.

    The exact overlap is strictly decreasing in b for fixed site and length,
    so plain bisection converges; iteration stops once the achieved overlap
    matches r to OVERLAP_RTOL relative.
    """
    f_lo = _site_overlap(b_lo, length, site) - r
    f_hi = _site_overlap(b_hi, length, site) - r
    if f_lo < 0.0 or f_hi > 0.0:
        return None
    lo, hi = b_lo, b_hi
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _site_overlap(mid, length, site) - r
        if abs(f_mid) <= OVERLAP_RTOL * r:
            return mid
        if f_mid >= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return mid


def solve_params(r: float, m: int = 4, b_interval: tuple[float, float] = (1.0, 3.0)) -> BoundChainParams:
    """Chain parameters with |<Psi_0|t_couple>|^2 equal to r exactly.

    r must lie in (0, 1/100).  The coupling site is the integer in the
    bracket (largest first) for which a bias root exists in b_interval; the
    bias is then found by bisection on the exactly diagonalized overlap.
    """
    _check_target(r)
    b_lo, b_hi = b_interval
    for t in _candidate_sites(r):
        length = m * t
        b = _bisect_bias(r, length, t, b_lo, b_hi)
        if b is not None:
            return BoundChainParams(b=b, t_couple=t, m=m, length=length)
    raise SolverError(
        f"no integer coupling site admits a bias in [{b_lo}, {b_hi}] for r={r}")


def _check_target(r: float) -> None:
    if not (0.0 < r < R_MAX):
        raise ValueError(f"target overlap must lie in (0, 1/100), got {r}")


@dataclass(frozen=True)
class FamilySolution:
    """Shared (m, t_max) and per-target chain parameters on equal-length chains."""

    m: int
    t_max: int
    entries: tuple[BoundChainParams, ...]

    @property
    def chain_length(self) -> int:
        return self.m * self.t_max


def solve_family(r_list, m: int = 4, b_interval: tuple[float, float] = (1.0, 3.0)) -> FamilySolution:
    """Solve a family of targets on chains of one shared length m * t_max.

    t_max is taken from the bracket of the smallest target; every entry gets
    its own coupling site t_i <= t_max and bias b_i on the shared chain.
    """
    r_list = [float(r) for r in r_list]
    if not r_list:
        raise ValueError("empty target list")
    for r in r_list:
        _check_target(r)
    r_min = min(r_list)
    b_lo, b_hi = b_interval
    lo, hi = t_bracket(r_min)
    t_max_candidates = [t for t in range(math.floor(hi), math.ceil(lo) - 1, -1) if t >= 2]
    last_err = None
    for t_max in t_max_candidates:
        length = m * t_max
        entries = []
        try:
            for r in r_list:
                solved = None
                for t in _candidate_sites(r, cap=t_max):
                    b = _bisect_bias(r, length, t, b_lo, b_hi)
                    if b is not None:
                        solved = BoundChainParams(b=b, t_couple=t, m=m, length=length)
                        break
                if solved is None:
                    raise SolverError(
                        f"no coupling site <= {t_max} reaches r={r} on length {length}")
                entries.append(solved)
            return FamilySolution(m=m, t_max=t_max, entries=tuple(entries))
        except SolverError as err:
            last_err = err
    raise SolverError(f"no shared t_max in the bracket works: {last_err}")


# ---------------------------------------------------------------------------
# unary qubit encoding
# ---------------------------------------------------------------------------

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_P0 = np.array([[1.0, 0.0], [0.0, 0.0]])
_P1 = np.array([[0.0, 0.0], [0.0, 1.0]])


def unary_terms(params: BoundChainParams, penalty_weight: float = 2.0):
    """Local terms of the unary encoding as (support, block) pairs.

    Chain state |t> is identified with the qubit string 1^t 0^(L-t); all
    terms act on at most 3 adjacent qubits (0-based sites).  Illegal strings
    (containing "01", or starting with 0) are lifted by penalty projectors.
    """
    if penalty_weight < 1.0:
        raise ValueError("penalty weight must be >= 1")
    length = params.length
    if length < 2:
        raise DimensionError("unary encoding needs chain length >= 2")
    terms: list[tuple[tuple[int, ...], np.ndarray]] = []

    def occupied(t):
        # projector onto chain state |t> expressed on 1-2 qubits
        if t < length:
            return (t - 1, t), np.kron(_P1, _P0)
        return (length - 1,), _P1

    # path-Laplacian diagonal: sum_t |t><t| + |t+1><t+1| over edges
    for t in range(1, length):
        for sup, blk in (occupied(t), occupied(t + 1)):
            terms.append((sup, blk))
    # hopping -(|t><t+1| + h.c.): flip qubit t (0-based) with 1 on the left
    # and, when present, 0 on the right
    for t in range(1, length):
        if t + 1 < length:
            sup = (t - 1, t, t + 1)
            blk = -np.kron(np.kron(_P1, _SX), _P0)
        else:
            sup = (length - 2, length - 1)
            blk = -np.kron(_P1, _SX)
        terms.append((sup, blk))
    # bonus on |1>
    sup, blk = occupied(1)
    terms.append((sup, -params.b * blk))
    # illegal-string penalties: "01" substrings and a missing leading 1
    for j in range(length - 1):
        terms.append(((j, j + 1), penalty_weight * np.kron(_P0, _P1)))
    terms.append(((0,), penalty_weight * _P0))
    return terms


def unary_encode(params: BoundChainParams, penalty_weight: float = 2.0) -> MultipartiteOperator:
    """Chain Hamiltonian encoded on `length` qubits with <=3-local terms."""
    system = SiteSystem((2,) * params.length)
    total = sum(
        (embed_local(system, sup, blk) for sup, blk in unary_terms(params, penalty_weight)),
        start=_zero_like(system),
    )
    return total


def _zero_like(system: SiteSystem) -> MultipartiteOperator:
    from .operator_core import zero

    return zero(system)


def unary_legal_indices(length: int) -> np.ndarray:
    """Basis indices of the legal strings 1^t 0^(L-t), t = 1..length."""
    idx = []
    acc = 0
    for t in range(1, length + 1):
        acc += 1 << (length - t)
        idx.append(acc)
    return np.array(idx, dtype=np.int64)


def amplification_ratio(b: float, b_ref: float, t: int) -> float:
    """Coupling-strength ratio of two biases at a fixed coupling site."""
    if b < 1.0 or b_ref < 1.0:
        raise ValueError("biases must be >= 1")
    if t < 1:
        raise ValueError("coupling site must be >= 1")
    return (b * (b + 2.0)) / (b_ref * (b_ref + 2.0)) * ((b_ref + 1.0) / (b + 1.0)) ** (2 * t)
