import numpy as np
import pytest
from hypothesis import given, settings

from conftest import amcs_params, random_hermitian, random_params
from stokes_qsl import fock
from stokes_qsl.errors import DimensionMismatch, NormalizationError, SectorUnderflow, ValidationError
from stokes_qsl.fock import AmcsParams, CrossKerr, FockStateN, GeneralHermitian

S2 = 1 / np.sqrt(2)


def raw_energy(n, ap, am, spec):
    c = fock.amcs_amplitudes(n, ap, am)
    return float(np.real(np.vdot(c, fock.apply_hamiltonian(spec, c))))


def fd_gradient(params, spec, h=1e-5):
    """Central differences of the raw quadratic form in (Re, Im) of each alpha."""
    n = params.n_total
    a = params.alpha.copy()
    out = []
    for i in range(2):
        parts = []
        for d in (h, 1j * h):
            up, dn = a.copy(), a.copy()
            up[i] += d
            dn[i] -= d
            parts.append((raw_energy(n, *up, spec) - raw_energy(n, *dn, spec)) / (2 * h))
        out.append(0.5 * (parts[0] + 1j * parts[1]))
    return np.array(out)


# ---- construction ---------------------------------------------------------------------


def test_amcs_single_photon_plus():
    s = fock.build_amcs(AmcsParams(1, 1.0, 0.0))
    np.testing.assert_allclose(s.amplitudes, [0, 1], atol=1e-15)


def test_amcs_n2_balanced():
    s = fock.build_amcs(AmcsParams(2, S2, S2))
    np.testing.assert_allclose(s.amplitudes, [0.5, S2, 0.5], atol=1e-15)


def test_preset_input_is_renormalized():
    params = AmcsParams(10, 0.95, 0.29 + 0.12j)
    raw = 0.95**2 + 0.29**2 + 0.12**2
    assert abs(raw - 1.001) < 1e-3
    assert abs(abs(params.alpha_plus) ** 2 + abs(params.alpha_minus) ** 2 - 1) < 1e-15
    assert params.alpha_plus == pytest.approx(0.95 / np.sqrt(raw))
    assert abs(fock.build_amcs(params).norm() - 1) < 1e-12


def test_far_from_unit_norm_rejected():
    with pytest.raises(NormalizationError):
        AmcsParams(3, 1.0, 0.1)
    with pytest.raises(NormalizationError):
        AmcsParams(3, 0.5, 0.5)


def test_photon_number_validation():
    with pytest.raises(ValidationError):
        AmcsParams(-1, 1.0, 0.0)
    with pytest.raises(ValidationError):
        AmcsParams(2.5, 1.0, 0.0)
    with pytest.raises(ValidationError):
        AmcsParams(fock.N_MAX + 1, 1.0, 0.0)


def test_state_dimension_checked():
    with pytest.raises(DimensionMismatch):
        FockStateN(3, np.ones(3))
    s = FockStateN.basis(4, 1)
    assert s.dim == 5 and s.amplitudes[1] == 1
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1.0


def test_large_n_amplitudes_finite():
    s = fock.build_amcs(AmcsParams.from_p(5000, 0.3, 0.7))
    assert np.all(np.isfinite(s.amplitudes))
    assert abs(s.norm() - 1) < 1e-10
    # binomial peak near N p
    assert abs(np.argmax(np.abs(s.amplitudes)) - 1500) <= 1


def test_half_log_binomials_exact_small():
    from math import comb, log

    for n in (0, 1, 7, 30):
        expected = [0.5 * log(comb(n, k)) for k in range(n + 1)]
        np.testing.assert_allclose(fock.half_log_binomials(n), expected, atol=1e-12)


def test_normalization_property(rng):
    worst = 0.0
    for _ in range(1000):
        params = random_params(rng, int(rng.integers(0, 60)))
        worst = max(worst, abs(fock.build_amcs(params).norm() - 1))
    assert worst < 1e-12


# ---- annihilation ---------------------------------------------------------------------


def test_annihilation_n1_to_vacuum():
    out = fock.apply_annihilation(fock.build_amcs(AmcsParams(1, 1.0, 0.0)), "plus")
    assert out.n_total == 0
    np.testing.assert_allclose(out.amplitudes, [1.0], atol=1e-15)


def test_annihilation_minus_n2():
    out = fock.apply_annihilation(fock.build_amcs(AmcsParams(2, S2, S2)), "minus")
    expect = np.sqrt(2) * S2 * fock.build_amcs(AmcsParams(1, S2, S2)).amplitudes
    np.testing.assert_allclose(out.amplitudes, expect, atol=1e-15)
    np.testing.assert_allclose(out.amplitudes, [S2, S2], atol=1e-15)


def test_annihilation_vacuum_underflow():
    with pytest.raises(SectorUnderflow):
        fock.apply_annihilation(FockStateN.basis(0, 0), "plus")


def test_annihilation_bad_mode():
    with pytest.raises(ValidationError):
        fock.apply_annihilation(FockStateN.basis(2, 0), "left")


def test_annihilation_on_fock_basis():
    out = fock.apply_annihilation(FockStateN.basis(5, 3), "plus")
    np.testing.assert_allclose(out.amplitudes, np.sqrt(3) * FockStateN.basis(4, 2).amplitudes)
    out = fock.apply_annihilation(FockStateN.basis(5, 3), "minus")
    np.testing.assert_allclose(out.amplitudes, np.sqrt(2) * FockStateN.basis(4, 3).amplitudes)


@settings(max_examples=200, deadline=None)
@given(amcs_params(1, 30))
def test_annihilation_identity_property(params):
    n = params.n_total
    s = fock.build_amcs(params)
    lower = fock.build_amcs(AmcsParams(n - 1, params.alpha_plus, params.alpha_minus)).amplitudes
    for mode, a in (("plus", params.alpha_plus), ("minus", params.alpha_minus)):
        diff = fock.apply_annihilation(s, mode).amplitudes - np.sqrt(n) * a * lower
        assert np.linalg.norm(diff) < 1e-12


# ---- Hamiltonians ---------------------------------------------------------------------


def test_cross_kerr_matrices():
    np.testing.assert_array_equal(np.diag(fock.hamiltonian_matrix(CrossKerr(1.0), 4)).real, [0, 3, 4, 3, 0])
    np.testing.assert_array_equal(fock.hamiltonian_matrix(CrossKerr(0.7), 1), np.zeros((2, 2)))
    np.testing.assert_array_equal(np.diag(fock.hamiltonian_matrix(CrossKerr(0.5), 2)).real, [0, 0.5, 0])


def test_general_hermitian_checks(rng):
    with pytest.raises(ValidationError):
        GeneralHermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionMismatch):
        GeneralHermitian(np.ones((2, 3)))
    spec = GeneralHermitian(random_hermitian(rng, 4))
    with pytest.raises(DimensionMismatch):
        fock.hamiltonian_matrix(spec, 5)
    assert spec.n_total == 3


def test_hamiltonian_hermiticity(rng):
    for n in range(0, 12):
        for spec in (CrossKerr(rng.normal()), GeneralHermitian(random_hermitian(rng, n + 1))):
            m = fock.hamiltonian_matrix(spec, n)
            assert np.max(np.abs(m - m.conj().T)) <= 1e-12


def test_expectation_examples():
    assert fock.expectation(fock.build_amcs(AmcsParams(2, S2, S2)), CrossKerr(1.0)) == pytest.approx(0.5, abs=1e-14)
    assert fock.expectation(fock.build_amcs(AmcsParams.from_p(10, 0.9)), CrossKerr(1.0)) == pytest.approx(8.1, abs=1e-12)
    assert fock.expectation(FockStateN.basis(6, 2), CrossKerr(0.0)) == 0.0


def test_expectation_requires_normalized_state():
    with pytest.raises(NormalizationError):
        fock.expectation(FockStateN(1, [1.0, 1.0]), CrossKerr(1.0))


@settings(max_examples=100, deadline=None)
@given(amcs_params(0, 40))
def test_cross_kerr_energy_closed_form(params):
    eps = 0.37
    n = params.n_total
    got = fock.expectation(fock.build_amcs(params), CrossKerr(eps))
    p = params.p
    assert got == pytest.approx(eps * n * (n - 1) * p * (1 - p), abs=1e-10 * max(1, n * n))


# ---- gradients ------------------------------------------------------------------------


def test_gradient_vanishes_without_minus_mode():
    gp, gm = fock.grad_expectation(AmcsParams(5, 1.0, 0.0), CrossKerr(1.3))
    assert gp == 0


def test_gradient_n2_balanced():
    gp, gm = fock.grad_expectation(AmcsParams(2, S2, S2), CrossKerr(1.0))
    assert gp == pytest.approx(S2, abs=1e-14)
    assert gm == pytest.approx(S2, abs=1e-14)


def test_gradient_vacuum_underflow():
    with pytest.raises(SectorUnderflow):
        fock.grad_expectation(AmcsParams(0, 1.0, 0.0), CrossKerr(1.0))


def test_gradient_general_hermitian_n4(rng):
    spec = GeneralHermitian(random_hermitian(rng, 5))
    params = random_params(rng, 4)
    got = np.array(fock.grad_expectation(params, spec))
    ref = fd_gradient(params, spec)
    assert np.max(np.abs(got - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_gradient_property(rng):
    for _ in range(100):
        n = int(rng.integers(1, 13))
        spec = CrossKerr(rng.uniform(0.1, 2.0)) if rng.random() < 0.5 else GeneralHermitian(random_hermitian(rng, n + 1))
        params = random_params(rng, n)
        got = np.array(fock.grad_expectation(params, spec))
        ref = fd_gradient(params, spec)
        scale = np.max(np.abs(ref))
        if scale < 1e-8:
            assert np.max(np.abs(got)) < 1e-6
            continue
        assert np.max(np.abs(got - ref)) <= 1e-6 * scale


# ---- Stokes ---------------------------------------------------------------------------


def test_stokes_examples():
    for n in (1, 4, 17):
        r = fock.stokes_of_state(fock.build_amcs(AmcsParams(n, 1.0, 0.0)))
        np.testing.assert_allclose(r.as_array(), [0, 0, 1], atol=1e-15)
    r = fock.stokes_of_state(fock.build_amcs(AmcsParams(2, S2, S2)))
    np.testing.assert_allclose(r.as_array(), [1, 0, 0], atol=1e-15)


def test_stokes_interior_point_for_cat_state():
    s = FockStateN(2, [S2, 0, S2])
    r = fock.stokes_of_state(s)
    assert abs(r.r_z) < 1e-15
    assert r.length < 1


def test_stokes_vacuum_underflow():
    with pytest.raises(SectorUnderflow):
        fock.stokes_of_state(FockStateN.basis(0, 0))


@settings(max_examples=200, deadline=None)
@given(amcs_params(1, 40))
def test_amcs_stokes_on_sphere(params):
    r = fock.stokes_of_state(fock.build_amcs(params))
    assert abs(r.length - 1) < 1e-9
    np.testing.assert_allclose(r.as_array(), fock.stokes_of_params(params).as_array(), atol=1e-12)


def test_random_states_inside_sphere(rng):
    for _ in range(200):
        n = int(rng.integers(1, 20))
        v = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
        r = fock.stokes_of_state(FockStateN(n, v / np.linalg.norm(v)))
        assert r.length <= 1 + 1e-12


def test_params_from_stokes_round_trip(rng):
    for _ in range(50):
        params = random_params(rng, 7)
        back = fock.params_from_stokes(7, fock.stokes_of_params(params).as_array())
        f = abs(np.vdot(fock.build_amcs(params).amplitudes, fock.build_amcs(back).amplitudes)) ** 2
        assert f == pytest.approx(1.0, abs=1e-12)
        assert back.alpha_plus.imag == 0 and back.alpha_plus.real >= 0
