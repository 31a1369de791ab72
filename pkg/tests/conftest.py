import numpy as np
import pytest

from localradon.bumps import gevrey_bump, hormander_sequence
from localradon.kernels import sjk_family
from localradon.phantoms import smooth_bump
from localradon.transform import synthesize_sinogram
from localradon.weights import (
    constant_weight,
    field_from_spec,
    weight_from_ab,
    zero_field,
)

EPS = 0.1
GAMMA = 0.3


@pytest.fixture(scope="session")
def f_main():
    return smooth_bump(center=(0.1, 0.45), width=0.3)


@pytest.fixture(scope="session")
def m_const():
    return constant_weight()


@pytest.fixture(scope="session")
def m_exp():
    # m = e^{x xi}: a = 1, b = 0
    return weight_from_ab(field_from_spec("one"), zero_field())


@pytest.fixture(scope="session")
def phi12():
    return hormander_sequence(12)


@pytest.fixture(scope="session")
def phi_gevrey2():
    return gevrey_bump(2.0, derivative_order_max=14)


@pytest.fixture(scope="session")
def f_sym():
    # even phantom: odd moments of its means vanish identically
    return smooth_bump(center=(0.0, 0.45), width=0.35)


@pytest.fixture(scope="session")
def phi8():
    return hormander_sequence(8)


@pytest.fixture(scope="session")
def sino_sym(f_sym, m_const):
    # fine eta grid and tight tolerance for the moment-oracle comparisons
    xi = np.linspace(-0.13, 0.13, 41)
    eta = np.linspace(-0.35, 0.35, 169)
    return synthesize_sinogram(f_sym, m_const, xi, eta, tol=1e-12)


@pytest.fixture(scope="session")
def sino_sym_weighted(f_sym, m_exp):
    xi = np.linspace(-0.13, 0.13, 41)
    eta = np.linspace(-0.35, 0.35, 169)
    return synthesize_sinogram(f_sym, m_exp, xi, eta, tol=1e-12)


@pytest.fixture(scope="session")
def sino_clean(f_main, m_const):
    xi = np.linspace(-0.13, 0.13, 41)
    eta = np.linspace(-0.35, 0.35, 57)
    return synthesize_sinogram(f_main, m_const, xi, eta, tol=1e-10)


@pytest.fixture(scope="session")
def sino_weighted(f_main, m_exp):
    xi = np.linspace(-0.13, 0.13, 41)
    eta = np.linspace(-0.35, 0.35, 57)
    return synthesize_sinogram(f_main, m_exp, xi, eta, tol=1e-10)


@pytest.fixture(scope="session")
def sino_wide(f_main, m_const):
    xi = np.linspace(-0.3, 0.3, 93)
    eta = np.linspace(-0.35, 0.35, 57)
    return synthesize_sinogram(f_main, m_const, xi, eta, tol=1e-10)


@pytest.fixture(scope="session")
def fam_exp():
    # kernels for the m = e^{x xi} weight family
    return sjk_family(field_from_spec("one"), zero_field(), GAMMA, 6)


@pytest.fixture(scope="session")
def fam_zero():
    return sjk_family(zero_field(), zero_field(), GAMMA, 4)


@pytest.fixture(scope="session")
def fam_generic():
    return sjk_family(field_from_spec("0.5*sin_xi"),
                      field_from_spec("0.5*cos_eta"), GAMMA, 4)
