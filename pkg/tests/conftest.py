import numpy as np
import pytest

from homflag import lie_core as lc


def cyclic_su2():
    """su(2)-isomorphic algebra: [e1,e2]=e3 cyclic, identity inner product."""
    c = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    return lc.build_algebra_from_tables(c, np.eye(3))


def unit_vector(algebra, label):
    v = np.zeros(algebra.dimension)
    v[algebra.labels.index(label)] = 1.0
    return v


def label_vectors(algebra, labels):
    return [unit_vector(algebra, lab) for lab in labels]


@pytest.fixture(scope="session")
def su2_cyclic():
    return cyclic_su2()


@pytest.fixture(scope="session")
def sphere_dec(su2_cyclic):
    """S^2 = su(2)/u(1) in the cyclic basis; m = span(e1, e2)."""
    return lc.build_decomposition(
        su2_cyclic, [[0.0, 0.0, 1.0]], torus_vectors=[[0.0, 0.0, 1.0]]
    )


@pytest.fixture(scope="session")
def su3():
    return lc.su(3)


@pytest.fixture(scope="session")
def su3_flag_dec(su3):
    torus = label_vectors(su3, ["D1", "D2"])
    return lc.build_decomposition(su3, torus, torus_vectors=torus)


@pytest.fixture(scope="session")
def sp2():
    return lc.sp(2)


@pytest.fixture(scope="session")
def cp3_dec(sp2):
    h = label_vectors(sp2, ["I1", "I2", "J22", "K22"])
    torus = label_vectors(sp2, ["I1", "I2"])
    return lc.build_decomposition(sp2, h, torus_vectors=torus)


@pytest.fixture(scope="session")
def su2xsu2():
    return lc.direct_sum(lc.su(2), lc.su(2))


@pytest.fixture(scope="session")
def su2xsu2_dec(su2xsu2):
    torus = label_vectors(su2xsu2, ["D1(1)", "D1(2)"])
    return lc.build_decomposition(su2xsu2, torus, torus_vectors=torus)
