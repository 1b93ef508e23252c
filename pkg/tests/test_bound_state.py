import math

import numpy as np
import pytest
import scipy.linalg as sla

import onescale as o
from onescale.bound_state import chain_diagonals


def chain_eigensystem(b, length):
    # oracle path: dense numpy eigh on the explicitly built tridiagonal
    d, e = chain_diagonals(b, length)
    mat = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    return np.linalg.eigh(mat)


# ---------------------------------------------------------------------------
# chain construction and spectrum
# ---------------------------------------------------------------------------

def test_chain_matrix_b1_l2():
    mat = o.build_bound_chain(1.0, 2).dense()
    assert np.array_equal(mat, np.array([[0.0, -1.0], [-1.0, 1.0]]))
    w = np.linalg.eigvalsh(mat)
    assert abs(w[0] - (1 - math.sqrt(5)) / 2) < 1e-14
    assert w[0] < -0.5  # -b^2/(b+1) at b = 1


def test_chain_is_tridiagonal_path_laplacian_minus_bonus():
    mat = o.build_bound_chain(2.5, 6).dense()
    lap = np.diag([1.0, 2, 2, 2, 2, 1]) - np.diag(np.ones(5), 1) - np.diag(np.ones(5), -1)
    bonus = np.zeros((6, 6))
    bonus[0, 0] = 2.5
    assert np.array_equal(mat, lap - bonus)


def test_chain_small_bias_is_nearly_laplacian():
    w = np.linalg.eigvalsh(o.build_bound_chain(1e-12, 8).dense())
    assert w[0] > -1e-10  # pure Laplacian limit is positive semi-definite


def test_chain_b2_l16_single_negative():
    w, _ = chain_eigensystem(2.0, 16)
    assert (w < -1e-10).sum() == 1
    assert w[0] < -4.0 / 3.0


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("length", [2, 4, 8, 16])
def test_unique_bound_state_grid(b, length):
    w, _ = chain_eigensystem(b, length)
    assert (w < -1e-10).sum() == 1
    assert w[0] < -b * b / (b + 1.0) + 1e-10
    assert w[1] >= -1e-10


def test_biased_clock_convention_shift():
    # sites 0..L-1 with bonus (b+1) on site 0 == sites 1..L with bonus b+1
    for b, length in ((1.0, 5), (2.2, 9)):
        assert np.array_equal(o.biased_clock(b, length).dense(),
                              o.build_bound_chain(b + 1.0, length).dense())


# ---------------------------------------------------------------------------
# ansatz state
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("b,length", [(1.0, 2), (1.7, 5), (3.0, 16)])
def test_ansatz_normalized(b, length):
    assert abs(np.linalg.norm(o.ansatz_state(b, length)) - 1.0) <= 1e-12


def test_ansatz_b1_l2_literal():
    a = o.ansatz_state(1.0, 2)
    assert np.allclose(a, [2 / math.sqrt(5), 1 / math.sqrt(5)], atol=1e-14)


@pytest.mark.parametrize("b", [1.0, 2.0, 3.0])
@pytest.mark.parametrize("length", [4, 8, 16])
def test_ansatz_overlap_with_ground_state(b, length):
    w, v = chain_eigensystem(b, length)
    g = v[:, 0] if v[0, 0] > 0 else -v[:, 0]
    a = o.ansatz_state(b, length)
    deficit = min(np.linalg.norm(g - a), np.linalg.norm(g + a)) ** 2
    assert deficit <= 10.0 * length * b * b / (b + 1.0) ** (2 * length)


# ---------------------------------------------------------------------------
# clock spectra and overlaps
# ---------------------------------------------------------------------------

def test_clock_spectrum_completeness():
    params = o.BoundChainParams(2.0, 4, 4)
    spec = o.chain_spectrum(params)
    assert abs(np.sum(spec.overlaps ** 2) - 1.0) <= 1e-12
    # excited completeness is exact: sum_{k>=1} p_k^2 = 1 - p_0^2
    assert abs(np.sum(spec.overlaps[1:] ** 2) - (1 - spec.overlaps[0] ** 2)) <= 1e-12
    assert spec.ground_energy < -4.0 / 3.0
    # penalized vector is the overlap-weighted excited sum
    site = params.t_couple - 1
    oracle = sum(spec.overlaps[k] * spec.eigenvectors[:, k]
                 for k in range(1, params.length))
    assert np.allclose(spec.penalized_vector, oracle, atol=1e-13)
    # and it reconstructs |t_couple> minus its ground component
    e_t = np.zeros(params.length)
    e_t[site] = 1.0
    assert np.allclose(spec.penalized_vector,
                       e_t - spec.overlaps[0] * spec.ground_state, atol=1e-12)


def test_exact_overlap_anchor():
    rep = o.exact_overlap(o.BoundChainParams(2.0, 4, 4), 4)
    assert abs(rep.predicted - 8.0 / 6561.0) < 1e-18
    assert rep.relative_error <= 4.0 * 3.0 ** (-8)
    assert 0.0 <= rep.exact <= 1.0


def test_exact_overlap_completeness_over_sites():
    params = o.BoundChainParams(1.5, 3, 4)
    total = sum(o.exact_overlap(params, t).exact for t in range(1, params.length + 1))
    assert abs(total - 1.0) <= 1e-12


@pytest.mark.parametrize("b", [1.0, 1.5, 2.0, 2.5, 3.0])
@pytest.mark.parametrize("t", [3, 4, 5, 6])
def test_overlap_asymptotics_grid(b, t):
    rep = o.exact_overlap(o.BoundChainParams(b, t, 4), t)
    assert rep.relative_error <= 4.0 * (b + 1.0) ** (-(4 - 2) * t)


def test_exact_overlap_site_out_of_range():
    with pytest.raises(o.DimensionError):
        o.exact_overlap(o.BoundChainParams(2.0, 4, 4), 17)


# ---------------------------------------------------------------------------
# parameter solvers
# ---------------------------------------------------------------------------

def test_solve_params_pinned_example():
    params = o.solve_params(0.005)
    assert params.t_couple == 4
    assert params.m == 4
    assert 1.25 < params.b < 1.35
    achieved = o.exact_overlap(params, params.t_couple).exact
    assert abs(achieved - 0.005) <= 1e-10 * 0.005


def test_solve_params_forward_anchor():
    # (b=2, T=4, M=4) is one exact solution for its own achieved overlap
    r = o.exact_overlap(o.BoundChainParams(2.0, 4, 4), 4).exact
    params = o.solve_params(r)
    achieved = o.exact_overlap(params, params.t_couple).exact
    assert abs(achieved - r) <= 1e-10 * r


def test_solve_params_domain():
    with pytest.raises(ValueError):
        o.solve_params(0.5)
    with pytest.raises(ValueError):
        o.solve_params(0.0)


def test_solve_params_round_trip_sample():
    rng = np.random.default_rng(23)
    targets = np.exp(rng.uniform(np.log(1e-6), np.log(1e-2), 10))
    for r in targets:
        params = o.solve_params(float(r))
        achieved = o.exact_overlap(params, params.t_couple).exact
        assert abs(achieved - r) <= 1e-10 * r


@pytest.mark.parametrize("t", [3, 4, 5])
def test_overlap_monotone_in_bias(t):
    values = []
    for b in np.linspace(1.0, 3.0, 21):
        rep = o.exact_overlap(o.BoundChainParams(float(b), t, 4), t)
        values.append(rep.exact)
    assert np.all(np.diff(values) < 0)


def test_solve_family_single_matches_solo():
    fam = o.solve_family([0.003])
    solo = o.solve_params(0.003)
    assert fam.t_max == solo.t_couple
    assert fam.entries[0].b == solo.b


def test_solve_family_equal_targets():
    fam = o.solve_family([0.002, 0.002])
    assert fam.entries[0] == fam.entries[1]


def test_solve_family_mixed():
    fam = o.solve_family([0.005, 0.0005])
    t1, t2 = fam.entries[0].t_couple, fam.entries[1].t_couple
    assert t1 < t2 <= fam.t_max
    assert fam.entries[0].length == fam.entries[1].length == 4 * fam.t_max
    for entry, r in zip(fam.entries, [0.005, 0.0005]):
        achieved = o.exact_overlap(entry, entry.t_couple).exact
        assert abs(achieved - r) <= 1e-10 * r


# ---------------------------------------------------------------------------
# unary encoding
# ---------------------------------------------------------------------------

def test_unary_l2_block_literal():
    params = o.BoundChainParams(1.5, 2, 4, length=2)
    enc = o.unary_encode(params).dense()
    legal = o.unary_legal_indices(2)  # strings 10, 11
    block = enc[np.ix_(legal, legal)]
    assert np.max(np.abs(block - o.build_bound_chain(1.5, 2).dense())) <= 1e-12


@pytest.mark.parametrize("b,m,t", [(1.0, 4, 2), (2.0, 4, 2), (2.5, 5, 2)])
def test_unary_block_equivalence(b, m, t):
    params = o.BoundChainParams(b, t, m)  # lengths 8 and 10
    enc = o.unary_encode(params).dense()
    legal = o.unary_legal_indices(params.length)
    block = enc[np.ix_(legal, legal)]
    chain = o.build_bound_chain(b, params.length).dense()
    assert np.max(np.abs(block - chain)) <= 1e-12
    # spectra of the restriction match the chain
    assert np.max(np.abs(np.linalg.eigvalsh(block) - np.linalg.eigvalsh(chain))) <= 1e-10


def test_unary_legal_sector_invariant():
    params = o.BoundChainParams(2.0, 2, 4)
    enc = o.unary_encode(params).dense()
    legal = o.unary_legal_indices(params.length)
    illegal = np.setdiff1d(np.arange(enc.shape[0]), legal)
    assert np.max(np.abs(enc[np.ix_(legal, illegal)])) == 0.0


def test_unary_ground_state_matches_chain():
    params = o.BoundChainParams(2.0, 2, 4)
    enc = o.unary_encode(params).dense()
    w_enc = np.linalg.eigvalsh(enc)
    w_chain = np.linalg.eigvalsh(o.build_bound_chain(2.0, params.length).dense())
    assert abs(w_enc[0] - w_chain[0]) <= 1e-10


def test_unary_all_zero_penalized():
    params = o.BoundChainParams(2.0, 2, 4)
    enc = o.unary_encode(params, penalty_weight=2.0).dense()
    assert enc[0, 0] >= 2.0


def test_unary_terms_are_three_local_adjacent():
    params = o.BoundChainParams(1.5, 2, 5)
    for support, block in o.unary_terms(params):
        assert len(support) <= 3
        assert max(support) - min(support) == len(support) - 1  # adjacent qubits
        assert block.shape == (2 ** len(support),) * 2


def test_unary_penalty_weight_precondition():
    with pytest.raises(ValueError):
        o.unary_terms(o.BoundChainParams(1.5, 2, 4), penalty_weight=0.5)


# ---------------------------------------------------------------------------
# amplification ratio
# ---------------------------------------------------------------------------

def test_amplification_anchors():
    for t in (1, 2, 5, 10):
        assert o.amplification_ratio(1.0, 1.0, t) == 1.0
    assert o.amplification_ratio(2.3, 2.3, 7) == pytest.approx(1.0, abs=1e-15)
    assert o.amplification_ratio(3.0, 1.0, 2) == pytest.approx(0.3125, abs=1e-15)


def test_amplification_domain():
    with pytest.raises(ValueError):
        o.amplification_ratio(0.5, 1.0, 3)
    with pytest.raises(ValueError):
        o.amplification_ratio(1.0, 1.0, 0)
