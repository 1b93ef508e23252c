import math

import numpy as np
import pytest

import onescale as o
from onescale.gadget import signature_block_indices

from conftest import SX, SY, SZ, SXX, single_qubit_target, two_qubit_target


# ---------------------------------------------------------------------------
# involution basis
# ---------------------------------------------------------------------------

def test_involution_basis_d2_literals():
    basis = o.involution_basis(2)
    assert len(basis) == 4
    assert np.array_equal(basis[0], np.diag([-1.0, 1.0]))
    assert np.array_equal(basis[1], np.diag([1.0, -1.0]))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_involution_basis_squares_to_identity(d):
    basis = o.involution_basis(d)
    assert len(basis) == d * d
    for e in basis:
        assert np.max(np.abs(e @ e - np.eye(d))) <= 1e-12
        assert np.max(np.abs(e - e.conj().T)) <= 1e-14


@pytest.mark.parametrize("d", [3, 4])
def test_involution_basis_full_rank(d):
    basis = o.involution_basis(d)
    stacked = np.stack([np.asarray(e, dtype=complex).ravel() for e in basis])
    gram_rank = np.linalg.matrix_rank(np.vstack([stacked.real, stacked.imag]).T, tol=1e-10)
    assert gram_rank == d * d


def test_involution_basis_d2_rank_deficit():
    # the d = 2 footnote set is traceless: rank 3, not 4
    basis = o.involution_basis(2)
    stacked = np.stack([np.asarray(e, dtype=complex).ravel() for e in basis])
    rank = np.linalg.matrix_rank(np.vstack([stacked.real, stacked.imag]).T, tol=1e-10)
    assert rank == 3
    assert all(abs(np.trace(e)) < 1e-14 for e in basis)


# ---------------------------------------------------------------------------
# decompose_involutions / normalize_target
# ---------------------------------------------------------------------------

def test_decompose_involution_identity_case():
    parts = o.decompose_involutions(3.0 * SZ)
    assert len(parts) == 1
    c, e = parts[0]
    assert abs(c - 3.0) < 1e-12
    assert np.max(np.abs(e - SZ)) < 1e-12


def test_decompose_zero_block():
    assert o.decompose_involutions(np.zeros((3, 3))) == []


def test_decompose_mixed_2x2():
    blk = SZ + 0.5 * SX
    # sz + 0.5 sx has norm sqrt(1.25), still an involution after scaling
    parts = o.decompose_involutions(blk)
    recon = sum(c * e for c, e in parts)
    assert np.max(np.abs(recon - blk)) <= 1e-10
    for c, e in parts:
        assert c > 0
        assert np.max(np.abs(e @ e - np.eye(2))) <= 1e-10


def test_decompose_traceful_2x2_uses_identity():
    blk = np.array([[1.0, 0.0], [0.0, 0.0]])  # outside the traceless span
    parts = o.decompose_involutions(blk)
    recon = sum(c * e for c, e in parts)
    assert np.max(np.abs(recon - blk)) <= 1e-10


def test_decompose_random_d3():
    rng = np.random.default_rng(31)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    blk = (a + a.conj().T) / 2
    parts = o.decompose_involutions(blk)
    recon = sum(c * e for c, e in parts)
    assert np.max(np.abs(recon - blk)) <= 1e-10
    for c, e in parts:
        assert c > 0
        assert np.max(np.abs(e @ e - np.eye(3))) <= 1e-10


def test_normalize_single_term():
    t = o.normalize_target(single_qubit_target(1.0))
    assert t.n_terms == 1
    assert t.terms[0].coefficient == pytest.approx(1.0 / 200.0, rel=1e-14)
    assert t.normalization == pytest.approx(200.0, rel=1e-14)


def test_normalize_two_terms():
    t = o.normalize_target(two_qubit_target(1.0, 50.0))
    coeffs = t.coefficients()
    assert coeffs[0] == pytest.approx(1.0 / 10000.0, rel=1e-14)
    assert coeffs[1] == pytest.approx(1.0 / 200.0, rel=1e-14)
    assert all(0 < c < 1.0 / 100.0 for c in coeffs)


def test_normalize_non_involutory_resummation():
    # |0><0| on one qubit is traceful: splits into several involutions
    proj = np.array([[1.0, 0.0], [0.0, 0.0]])
    raw = o.TargetHamiltonian(
        system=o.SiteSystem((2,)),
        terms=(o.LocalTerm("p", (0,), 3.0, proj),),
    )
    normalized = o.normalize_target(raw)
    assert normalized.n_terms > 1
    rebuilt = normalized.normalization * normalized.matrix().dense()
    original = raw.matrix().dense()
    scale = np.linalg.norm(original, 2)
    assert np.linalg.norm(rebuilt - original, 2) <= 1e-10 * scale
    for term in normalized.terms:
        assert term.is_involution
        assert 0 < term.coefficient < 1.0 / 100.0


def test_normalize_idempotent():
    t = o.normalize_target(two_qubit_target(1.0, 50.0))
    assert o.normalize_target(t) is t


def test_target_rejects_zero_coefficient():
    with pytest.raises(ValueError):
        o.LocalTerm("bad", (0,), 0.0, SZ)


def test_target_ratio_and_scale():
    t = two_qubit_target(2.0, 50.0)
    assert t.r_scale == 50.0
    assert t.r_max_ratio == 25.0


# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------

def test_compile_n1_structure(artifact_n1):
    a = artifact_n1
    assert a.c == 4.0  # 4 * 1^(2+delta)
    assert a.n_terms == 1
    assert a.chain_length == 4 * a.t_max
    assert a.system.dims == (2, a.chain_length)
    # coupling equals the kron oracle h (x) |t><t| (strength comes from the
    # clock overlap, not from a prefactor)
    proj = np.zeros((a.chain_length, a.chain_length))
    proj[a.chains[0].t_couple - 1, a.chains[0].t_couple - 1] = 1.0
    oracle = np.kron(a.target.terms[0].block, proj)
    assert np.max(np.abs(a.coupling.dense() - oracle)) <= 1e-12


def test_compile_clock_blocks(artifact_small):
    a = artifact_small
    for spec in a.spectra:
        shifted = a.c * spec.shifted_energies()
        assert abs(shifted[0]) <= 1e-12
        assert shifted[1] > a.c / 2.0  # gap bound, scaled by C


def test_compile_locality_audit(artifact_small, tiled_small):
    k = max(len(t.support) for t in artifact_small.target.terms)
    assert max(len(s) for s in artifact_small.coupling_supports) <= k + 1
    k_t = max(len(t.support) for t in tiled_small.target.terms)
    assert max(len(s) for s in tiled_small.coupling_supports) <= k_t + 2


def test_compile_solver_overlaps_exact(artifact_small):
    a = artifact_small
    for rp, spec in zip(a.r_primes, a.spectra):
        p0sq = spec.overlaps[0] ** 2
        assert abs(p0sq - rp) <= 1e-10 * rp


def test_compile_dimension_cap():
    with pytest.raises(o.PolicyError, match="dimension"):
        o.compile_gadget(two_qubit_target(1.0, 50.0), delta=1.0, dim_cap=1000)


def test_compile_tiled_policy():
    terms = tuple(
        o.LocalTerm(f"t{i}", (i,), float(2 ** i), SZ) for i in range(7)
    )
    target = o.TargetHamiltonian(system=o.SiteSystem((2,) * 7), terms=terms)
    with pytest.raises(o.PolicyError, match="tile register"):
        o.compile_gadget(target, delta=1.0, mode="tiled")


def test_compile_rejects_bad_mode():
    with pytest.raises(ValueError):
        o.compile_gadget(single_qubit_target(), delta=1.0, mode="both")


def test_default_strength():
    assert o.default_strength(1, 1.0) == 4.0
    assert o.default_strength(2, 1.0) == 32.0
    assert o.default_strength(2, 0.0) == 16.0


# ---------------------------------------------------------------------------
# predicted effective Hamiltonian
# ---------------------------------------------------------------------------

def test_predicted_effective_n1(artifact_n1):
    a = artifact_n1
    heff = o.predicted_effective(a).dense()
    psi = a.clock_ground_vector()
    oracle = np.kron(SZ / 200.0, np.outer(psi, psi))
    assert np.max(np.abs(heff - oracle)) <= 1e-12


def test_predicted_effective_norm(artifact_small):
    a = artifact_small
    heff_norm = o.spectral_norm(o.predicted_effective(a).dense())
    h0_norm = np.linalg.norm(a.target.matrix().dense(), 2)
    # the clock ground factor is rank one and unit norm
    assert heff_norm == pytest.approx(h0_norm, rel=1e-10)


def test_predicted_effective_spectrum_scaled(artifact_small):
    a = artifact_small
    target_raw = two_qubit_target(10.0, 50.0)
    scaled = np.linalg.eigvalsh(target_raw.matrix().dense()) / (200.0 * a.r_scale)
    assert np.allclose(a.effective_eigenvalues(), scaled, atol=1e-12)


# ---------------------------------------------------------------------------
# tiled restriction
# ---------------------------------------------------------------------------

def test_restricted_block_requires_tiled(artifact_small):
    with pytest.raises(ValueError):
        o.restricted_block(artifact_small, 1)


def test_restricted_block_projection_oracle(tiled_small):
    a = tiled_small
    sim = a.simulator.matrix.tocsr()
    blocks = []
    for i in (1, 2):
        idx = signature_block_indices(a, i)
        projected = sim[idx][:, idx].toarray()
        block = o.restricted_block(a, i).dense()
        # within a ground signature the tiling contributes the constant -1
        assert np.max(np.abs(projected - (block - np.eye(len(idx))))) == 0.0
        blocks.append(block)
    # distinct couplings never co-occur inside one signature block
    c0 = o.coupling_term_op(a, 0).dense()
    c1 = o.coupling_term_op(a, 1).dense()
    strong = a.strong.dense()
    assert np.max(np.abs(blocks[0] - (strong + c0))) == 0.0
    assert np.max(np.abs(blocks[1] - (strong + c1))) == 0.0


def test_restricted_block_ground_energy_nonpositive(tiled_small):
    block = o.restricted_block(tiled_small, 1).dense()
    assert np.linalg.eigvalsh(block)[0] <= 0.0


def test_signature_index_bounds(tiled_small):
    with pytest.raises(o.DimensionError):
        o.restricted_block(tiled_small, 3)


# ---------------------------------------------------------------------------
# structured split and eta
# ---------------------------------------------------------------------------

def test_structured_projector_pair(artifact_n1):
    pair, lam = o.structured_projector_pair(artifact_n1)
    um, up = pair.minus_basis, pair.plus_basis
    n = artifact_n1.system.total_dim
    assert um.shape == (n, artifact_n1.d_sys)
    assert np.max(np.abs(um.conj().T @ um - np.eye(artifact_n1.d_sys))) <= 1e-12
    assert np.max(np.abs(up.conj().T @ up - np.eye(up.shape[1]))) <= 1e-10
    assert np.max(np.abs(um.conj().T @ up)) <= 1e-12
    strong = artifact_n1.strong.dense()
    # the plus columns are eigenvectors of the strong part with the listed energies
    assert np.max(np.abs(strong @ up - up * lam)) <= 1e-10 * artifact_n1.c
    # the minus columns are annihilated (clock ground shifted to zero)
    assert np.max(np.abs(strong @ um)) <= 1e-10 * artifact_n1.c


def test_eta_matches_dense_oracle(artifact_n1):
    a = artifact_n1
    spec = a.spectra[0]
    length = a.chain_length
    chain = o.build_bound_chain(a.chains[0].b, length).dense()
    shifted = a.c * (chain - spec.ground_energy * np.eye(length))
    # oracle: numpy eigendecomposition, independent of the tridiagonal path
    w, v = np.linalg.eigh(shifted)
    site = a.chains[0].t_couple - 1
    for z in (-1.0, 0.0, 1.0, 0.3 + 0.2j):
        oracle = sum((v[site, k] ** 2) / (z - w[k]) for k in range(1, length))
        assert abs(a.eta(0, z) - oracle) <= 1e-12


def test_with_zero_coupling(artifact_n1):
    zeroed = artifact_n1.with_zero_coupling()
    assert zeroed.zeroed
    assert np.max(np.abs(zeroed.effective_block())) == 0.0
    assert np.max(np.abs(zeroed.simulator.dense() - artifact_n1.strong.dense())) <= 1e-12
