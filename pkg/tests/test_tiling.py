import numpy as np
import pytest

import onescale as o
from onescale.tiling import string_energy, tile_system


def exhaustive_energies(n):
    # independent oracle: enumerate every ternary string and score it by hand
    n_sites = n + 2
    out = {}
    for idx in range(3 ** n_sites):
        digits = []
        rem = idx
        for s in range(n_sites):
            digits.append(rem // 3 ** (n_sites - 1 - s))
            rem %= 3 ** (n_sites - 1 - s)
        e = 0
        for i in range(n + 1):
            if (digits[i], digits[i + 1]) in {(2, 1), (2, 0), (1, 0), (1, 1)}:
                e += 2
        for i in range(n):
            if digits[i:i + 3] == [0, 1, 2]:
                e -= 1
        out[idx] = e
    return out


def test_diagonal_matches_oracle_small():
    for n in (1, 2, 3):
        oracle = exhaustive_energies(n)
        diag = o.tiling_diagonal(n)
        assert all(diag[k] == v for k, v in oracle.items())


def test_n1_smallest_instance():
    diag = o.tiling_diagonal(1)
    sys_ = tile_system(1)
    idx_012 = sys_.basis_index((0, 1, 2))
    assert diag[idx_012] == -1
    assert diag.min() == -1
    assert (diag == -1).sum() == 1


def test_build_tiling_is_diagonal_integer():
    op = o.build_tiling(3)
    mat = op.dense()
    assert np.array_equal(mat, np.diag(np.diag(mat)))
    assert np.array_equal(np.diag(mat), np.diag(mat).astype(int))


def test_n3_ground_space_pattern():
    sigs = o.ground_signatures(3)
    assert [s.string for s in sigs] == ["01222", "00122", "00012"]
    diag = o.tiling_diagonal(3)
    assert all(diag[s.basis_index] == -1 for s in sigs)


def test_n4_first_excited_zero():
    diag = o.tiling_diagonal(4)
    vals = np.unique(diag)
    assert vals[0] == -1 and vals[1] == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_exhaustive_ground_space(n):
    # integer arithmetic, zero tolerance
    diag = o.tiling_diagonal(n)
    assert diag.min() == -1
    assert (diag == -1).sum() == n
    assert sorted(set(diag))[1] == 0
    ground = set(np.nonzero(diag == -1)[0].tolist())
    assert ground == {s.basis_index for s in o.ground_signatures(n)}


def test_n5_minimality_by_scan():
    diag = o.tiling_diagonal(5)
    sigs = o.ground_signatures(5)
    assert len(sigs) == 5
    assert set(np.nonzero(diag == diag.min())[0].tolist()) == {s.basis_index for s in sigs}


def test_signature_structure():
    for n in (1, 2, 5):
        for i, sig in enumerate(o.ground_signatures(n), start=1):
            s = sig.string
            assert len(s) == n + 2
            assert s.count("1") == 1
            assert s.index("1") == i
            assert set(s[:i]) == {"0"}
            assert set(s[i + 1:]) == {"2"}


def test_signature_projectors_orthogonal_and_sum():
    n = 3
    projs = [o.signature_projector(n, i).dense() for i in range(1, n + 1)]
    for i in range(n):
        for j in range(n):
            prod = projs[i] @ projs[j]
            if i == j:
                assert np.array_equal(prod, projs[i])
            else:
                assert np.max(np.abs(prod)) == 0.0
    total = sum(projs)
    diag = o.tiling_diagonal(n)
    ground = np.diag((diag == -1).astype(float))
    assert np.array_equal(total, ground)


def test_signature_selects_single_interaction():
    # <sig_i| |1><1|_j |sig_i> = delta_ij: the '1' sits at qutrit i only
    n = 4
    for i, sig in enumerate(o.ground_signatures(n), start=1):
        digits = sig.digits
        for j in range(1, n + 1):
            expected = 1.0 if i == j else 0.0
            assert (digits[j] == 1) == bool(expected)


def test_cross_term_annihilation_exact():
    # (|1><1|_i Pi_tile)(|1><1|_j Pi_tile) = 0 for i != j
    n = 3
    sys_ = tile_system(n)
    pi_tile = sum(o.signature_projector(n, i).dense() for i in range(1, n + 1))
    p1 = np.diag([0.0, 1.0, 0.0])
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            a = o.embed_local(sys_, [i], p1).dense() @ pi_tile
            b = o.embed_local(sys_, [j], p1).dense() @ pi_tile
            assert np.max(np.abs(a @ b)) == 0.0


def test_index_errors():
    with pytest.raises(o.DimensionError):
        o.signature_projector(3, 0)
    with pytest.raises(o.DimensionError):
        o.signature_projector(3, 4)
    with pytest.raises(o.DimensionError):
        o.build_tiling(0)
