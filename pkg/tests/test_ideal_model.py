import math

import numpy as np
import pytest

from cvkitten.ideal_model import (
    basis_rotation_residual,
    ideal_biased_amplitudes,
    ideal_single_photon_norm,
    ideal_unbiased_amplitudes,
    phi_e_decomposition,
    regime,
    regrouped_state,
    rotate_fock,
)
from cvkitten.temporal_modes import change_of_basis, overlap_I

GRID = [(r, d) for r in (0.1, 0.3, 0.5, 0.9) for d in (0.0, 0.2, 1.0, 3.0, 10.0)]


def test_unbiased_example():
    amp = ideal_unbiased_amplitudes(0.3, 1.0).amplitudes
    assert amp[(0, 0)] / amp[(1, 1)] == pytest.approx(math.exp(-1) / 0.3, rel=1e-14)
    assert amp[(0, 0)] / amp[(1, 1)] == pytest.approx(1.22626, abs=1e-5)
    assert amp[(2, 0)] == amp[(0, 2)] == pytest.approx(overlap_I(1.0) * 0.09 / math.sqrt(2), rel=1e-14)


def test_biased_far_limit_symmetric():
    amp = ideal_biased_amplitudes(0.3, 40.0).amplitudes
    # the cross term vanishes and |2,0>, |0,2> carry opposite halves of |1,1>
    assert amp[(2, 0)] == pytest.approx(-amp[(0, 2)], rel=1e-12)
    assert amp[(2, 0)] == pytest.approx(0.09 / math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("r, d", GRID)
def test_basis_rotation(r, d):
    assert basis_rotation_residual(r, d) < 1e-12


def test_rotate_fock_unitary():
    rng = np.random.default_rng(3)
    n1, n2 = np.indices((4, 4))
    state = np.where(n1 + n2 <= 3, rng.normal(size=(4, 4)), 0.0)
    U = change_of_basis()
    out = rotate_fock(state, U)
    assert np.sum(out**2) == pytest.approx(np.sum(state**2), rel=1e-13)
    back = rotate_fock(out, U.T)
    assert np.allclose(back, state, atol=1e-14)


def test_nu_e_example():
    dec = phi_e_decomposition(0.3, 1.0)
    assert dec.nu_e == pytest.approx(math.sqrt(0.86), abs=1e-15)
    assert dec.nu_e == pytest.approx(0.927362, abs=1e-6)


@pytest.mark.parametrize("r, d", GRID)
def test_phi_e_normalized(r, d):
    dec = phi_e_decomposition(r, d)
    assert dec.c2**2 + dec.c0**2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("r, d", GRID)
def test_regrouped_matches_unbiased(r, d):
    state = regrouped_state(r, d)
    want = ideal_unbiased_amplitudes(r, d)
    assert np.sum(state**2) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(state, want.fock_vector() / want.norm, atol=1e-12)


def test_regrouped_literal_weight_differs():
    state = regrouped_state(0.3, 1.0, weight_scale=1.0)
    assert abs(np.sum(state**2) - 1.0) > 1e-2


def test_single_photon_norm():
    assert ideal_single_photon_norm(0.3, 0.05) == pytest.approx(0.067082, abs=1e-6)
    assert ideal_single_photon_norm(0.3, 0.05) == pytest.approx(math.sqrt(0.05) * 0.3, rel=1e-15)
    with pytest.raises(ValueError):
        ideal_single_photon_norm(1.0)


def test_invalid_ratio():
    with pytest.raises(ValueError):
        ideal_unbiased_amplitudes(0.0, 1.0)
    with pytest.raises(ValueError):
        phi_e_decomposition(1.0, 1.0)


def test_regime_labels():
    assert regime(0.01) == "even-kitten regime"
    assert regime(1.0) == "intermediate"
    assert regime(10.0) == "odd-kitten regime"
