"""Diagonal qutrit tiling Hamiltonian with an N-fold signature ground space.

On N+2 qutrits (indices 0..N+1) the operator penalizes the adjacent pairs
21, 20, 10, 11 on interior bonds and rewards the pattern 012 anywhere in the
left-aligned window, producing exactly N ground strings of the form
0^i 1 2^(N+1-i) at energy -1 with a gap of 1.  Each ground string carries a
single '1', so couplings conditioned on |1><1| at qutrit i select exactly
one signature.  All energies are integers; the diagonal is built with
integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .operator_core import (
    DENSE_THRESHOLD,
    DimensionError,
    MultipartiteOperator,
    SiteSystem,
)

_PAIR_PENALTIES = {(2, 1), (2, 0), (1, 0), (1, 1)}


def tile_system(n: int) -> SiteSystem:
    return SiteSystem((3,) * (n + 2))


def _all_strings(n_sites: int) -> np.ndarray:
    """All ternary strings as digit rows, ordered by basis index (site-0-major)."""
    idx = np.arange(3 ** n_sites, dtype=np.int64)
    digits = np.empty((len(idx), n_sites), dtype=np.int8)
    for s in range(n_sites):
        digits[:, s] = (idx // 3 ** (n_sites - 1 - s)) % 3
    return digits


def string_energy(digits, n: int) -> int:
    """Integer diagonal energy of one ternary string.

    Pair penalties act on every adjacent pair (0..N); restricting them to
    the interior pairs would leave the boundary qutrits unconstrained and
    inflate the ground degeneracy beyond the N signature strings.
    """
    e = 0
    for i in range(n + 1):
        if (digits[i], digits[i + 1]) in _PAIR_PENALTIES:
            e += 2
    for i in range(n):
        if digits[i] == 0 and digits[i + 1] == 1 and digits[i + 2] == 2:
            e -= 1
    return e


def tiling_diagonal(n: int) -> np.ndarray:
    """Integer diagonal of the tiling Hamiltonian over all 3^(N+2) strings."""
    if n < 1:
        raise DimensionError("need at least one interaction")
    rows = _all_strings(n + 2)
    return np.array([string_energy(r, n) for r in rows], dtype=np.int64)


def build_tiling(n: int) -> MultipartiteOperator:
    system = tile_system(n)
    diag = tiling_diagonal(n).astype(float)
    if system.total_dim > DENSE_THRESHOLD:
        mat = sp.diags(diag, format="csr")
    else:
        mat = np.diag(diag)
    return MultipartiteOperator(system, mat)


@dataclass(frozen=True)
class TileSignature:
    """Ground string 0^i 1 2^(N+1-i) selecting interaction i."""

    n: int
    index: int  # 1..n
    string: str

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.string)

    @property
    def basis_index(self) -> int:
        return tile_system(self.n).basis_index(self.digits)


def ground_signatures(n: int) -> list[TileSignature]:
    if n < 1:
        raise DimensionError("need at least one interaction")
    sigs = []
    for i in range(1, n + 1):
        s = "0" * i + "1" + "2" * (n + 1 - i)
        sigs.append(TileSignature(n=n, index=i, string=s))
    return sigs


def signature_projector(n: int, i: int) -> MultipartiteOperator:
    """Rank-1 diagonal projector onto signature i's basis string."""
    if not 1 <= i <= n:
        raise DimensionError(f"signature index {i} outside 1..{n}")
    system = tile_system(n)
    sig = ground_signatures(n)[i - 1]
    k = sig.basis_index
    if system.total_dim > DENSE_THRESHOLD:
        mat = sp.csr_matrix(([1.0], ([k], [k])), shape=(system.total_dim,) * 2)
    else:
        mat = np.zeros((system.total_dim,) * 2)
        mat[k, k] = 1.0
    return MultipartiteOperator(system, mat)
