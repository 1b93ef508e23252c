"""Shared fixtures: small reference targets and compiled artifacts.

Heavy artifacts (dense diagonalization at dimensions up to 3136) are
session-scoped so the whole suite pays for each of them once.
"""

import numpy as np
import pytest

import onescale as o

SZ = np.diag([1.0, -1.0])
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SXX = np.kron(SX, SX)


def two_qubit_target(r1: float, r2: float) -> o.TargetHamiltonian:
    return o.TargetHamiltonian(
        system=o.SiteSystem((2, 2)),
        terms=(
            o.LocalTerm("z0", (0,), r1, SZ),
            o.LocalTerm("xx", (0, 1), r2, SXX),
        ),
    )


def single_qubit_target(r: float = 1.0) -> o.TargetHamiltonian:
    return o.TargetHamiltonian(
        system=o.SiteSystem((2,)),
        terms=(o.LocalTerm("z", (0,), r, SZ),),
    )


@pytest.fixture(scope="session")
def artifact_n1():
    # single sigma_z term: C = 4, chain length 16, dimension 32
    return o.compile_gadget(single_qubit_target(), delta=2.0)


@pytest.fixture(scope="session")
def dec_n1(artifact_n1):
    return o.eigh(artifact_n1.simulator)


@pytest.fixture(scope="session")
def artifact_small():
    # r = (10, 50): t_max = 5, chains of length 20, dimension 1600
    return o.compile_gadget(two_qubit_target(10.0, 50.0), delta=1.0)


@pytest.fixture(scope="session")
def dec_small(artifact_small):
    return o.eigh(artifact_small.simulator)


@pytest.fixture(scope="session")
def tiled_small():
    # same target compiled in tiled mode; signature blocks are 1600-dim
    return o.compile_gadget(two_qubit_target(10.0, 50.0), delta=1.0, mode="tiled")


@pytest.fixture(scope="session")
def artifact_c7():
    # the end-to-end acceptance instance: r = (1, 50), delta = 1, dim 3136
    return o.compile_gadget(two_qubit_target(1.0, 50.0), delta=1.0)


@pytest.fixture(scope="session")
def dec_c7(artifact_c7):
    return o.eigh(artifact_c7.simulator)
