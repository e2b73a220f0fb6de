import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from checkerboard.lattice import LatticeSpec, TransitionRates
from checkerboard.spectral import (
    I2,
    I4,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ModeAmplitudes,
    MomentumPoint,
    assemble_intermediate,
    bilinearization_residual,
    block_hadamard,
    block_rotation,
    build_two_block,
    dft_forward,
    dft_forward_direct,
    dft_inverse,
    dirac_alpha,
    dirac_beta,
    dirac_form,
    dispersion,
    eig4,
    mode_constraint_residual,
    on_shell_spinor,
    phase_matrix,
    phase_matrix_inverse,
    phase_transform,
    pre_dirac_form,
    rephased_intermediate,
    rotate_momentum_block,
    sigma_conjugate,
    sigma_dot,
    sigma_permutation,
    two_block_det,
    u_phi,
    u_theta,
)

momentum = st.tuples(*[st.floats(-10, 10, allow_nan=False)] * 3)
mass = st.floats(0, 10, allow_nan=False)


# --- Fourier amplitudes -----------------------------------------------------------


def plane_wave_window(n, nt, spec, kp, ke):
    p = 2 * np.pi * np.fft.fftfreq(n, spec.delta_z)[kp]
    e = 2 * np.pi * np.fft.fftfreq(nt, spec.delta_t)[ke]
    z = np.arange(n)[:, None] * spec.delta_z
    t = np.arange(nt)[None, :] * spec.delta_t
    wave = np.exp(-1j * (p * z - e * t))
    return np.stack([wave, 0 * wave], axis=2)


def test_plane_wave_gives_unit_spike():
    spec = LatticeSpec(0.1, 32)
    u = plane_wave_window(32, 16, spec, 5, 3)
    s = dft_forward(u, spec)
    expected = np.zeros_like(s.a)
    expected[5, 3, 0] = 1.0
    np.testing.assert_allclose(s.a, expected, atol=1e-12)
    # the backward branch sees the same wave at E -> -E
    assert abs(s.abar[5, -3, 0] - 1.0) < 1e-12


def test_zero_field_zero_spectrum():
    spec = LatticeSpec(0.1, 8)
    s = dft_forward(np.zeros((8, 4, 2)), spec)
    assert not s.a.any() and not s.abar.any()


def test_roundtrip_large_random():
    spec = LatticeSpec(0.05, 256)
    rng = np.random.default_rng(0)
    u = rng.normal(size=(256, 256, 2)) + 1j * rng.normal(size=(256, 256, 2))
    s = dft_forward(u, spec)
    np.testing.assert_allclose(dft_inverse(s, "a"), u, atol=1e-12)
    np.testing.assert_allclose(dft_inverse(s, "abar"), u, atol=1e-12)


def test_fft_matches_direct_sum():
    spec = LatticeSpec(0.2, 12)
    rng = np.random.default_rng(1)
    u = rng.normal(size=(12, 10, 2)) + 1j * rng.normal(size=(12, 10, 2))
    np.testing.assert_allclose(dft_forward(u, spec).a, dft_forward_direct(u, spec), atol=1e-13)


def test_non_rectangular_window_rejected():
    with pytest.raises(ValueError):
        dft_forward(np.zeros((8, 4)), LatticeSpec(0.1, 8))


# --- mode equations -------------------------------------------------------------


def test_massless_right_mover():
    rates = TransitionRates(0.4, 0.4)
    assert mode_constraint_residual(ModeAmplitudes(0.7 - 0.2j, 0), MomentumPoint.along_z(2.0, 2.0), rates) == 0.0


def test_on_shell_eigenvector_residual():
    rates = TransitionRates(4.5, 0.5)  # signed mass 4
    pt = MomentumPoint.along_z(3.0, 5.0, 4.0)
    w, v = np.linalg.eigh(3.0 * SIGMA_Z + 4.0 * SIGMA_Y)
    a = v[:, 1]
    assert w[1] == pytest.approx(5.0)
    assert mode_constraint_residual(ModeAmplitudes(*a), pt, rates) <= 1e-12


def test_off_shell_residual():
    rates = TransitionRates(0.3, 0.3)
    assert mode_constraint_residual(ModeAmplitudes(1, 0), MomentumPoint.along_z(2.0, 3.0), rates) == pytest.approx(1.0)


def test_backward_constraints_flip_energy():
    rates = TransitionRates(0.9, 0.3)
    rng = np.random.default_rng(2)
    a = rng.normal(size=2) + 1j * rng.normal(size=2)
    pt = MomentumPoint.along_z(1.1, 0.7)
    forward_only = mode_constraint_residual(ModeAmplitudes(*a), pt, rates)
    backward_only = mode_constraint_residual(ModeAmplitudes(0, 0, *a), MomentumPoint.along_z(1.1, -0.7), rates)
    assert forward_only == pytest.approx(backward_only, rel=1e-14)


def test_mode_constraints_are_one_dimensional():
    with pytest.raises(ValueError):
        mode_constraint_residual(ModeAmplitudes(1, 0), MomentumPoint((1, 0, 0), 1.0), TransitionRates(0, 0))


# --- two-blocks and dispersion ---------------------------------------------------------


def test_two_block_examples():
    np.testing.assert_array_equal(build_two_block(MomentumPoint.along_z(1, 1)), np.diag([1, -1]))
    np.testing.assert_array_equal(build_two_block(MomentumPoint.along_z(0, 1, 1)), [[0, -1j], [1j, 0]])
    np.testing.assert_allclose(np.linalg.eigvalsh(build_two_block(MomentumPoint.along_z(3, 5, 4))), [-5, 5])
    pt = MomentumPoint.along_z(1.5, 0.0, 0.5)
    np.testing.assert_array_equal(build_two_block(pt, "backward"), -build_two_block(pt))


def test_dispersion_examples():
    assert dispersion(MomentumPoint.along_z(3, 0, 4)) == (5.0, -5.0)
    assert dispersion(MomentumPoint.along_z(0, 0, 2.5)) == (2.5, -2.5)
    assert dispersion(MomentumPoint.along_z(1.5, 0)) == (1.5, -1.5)


@settings(max_examples=200, deadline=None)
@given(p=momentum, m=st.floats(0.1, 5), branch=st.sampled_from([1, -1]))
def test_dispersion_gate(p, m, branch):
    pt = MomentumPoint.on_shell(p, m, branch)
    assert abs(two_block_det(pt)) <= 1e-12 * max(1.0, pt.E**2)
    assert abs(two_block_det(pt, pt.E + 1e-3)) > 1e-4
    assert abs(two_block_det(pt, pt.E, "backward")) <= 1e-12 * max(1.0, pt.E**2)


# --- phase and permutation ----------------------------------------------------------------


def test_phase_examples():
    modes = ModeAmplitudes(1.0, 2.0, 3.0, 4.0)
    same = phase_transform(modes, 0.0)
    assert (same.a_plus, same.a_minus, same.abar_plus, same.abar_minus) == (1, 2, 3, 4)
    out = phase_transform(ModeAmplitudes(1.0, 1.0))
    assert out.a_plus == pytest.approx(np.exp(-0.75j * np.pi))
    assert out.a_minus == pytest.approx(np.exp(0.75j * np.pi))
    for phi in np.linspace(-7, 7, 15):
        np.testing.assert_allclose(phase_matrix(phi) @ phase_matrix_inverse(phi), I2, atol=1e-15)


def test_intermediate_properties():
    h = assemble_intermediate(MomentumPoint.along_z(3, 5, 4))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)), [-5, -5, 5, 5], atol=1e-13)
    np.testing.assert_allclose(h @ h, 25 * I4, atol=1e-13)
    np.testing.assert_array_equal(assemble_intermediate(MomentumPoint.along_z(2, 2)), np.diag([2, -2, -2, 2]))


def test_rephasing_reproduces_intermediate():
    pt = MomentumPoint.along_z(1.7, 0.0, 0.6)
    np.testing.assert_allclose(rephased_intermediate(pt, math.pi / 2), assemble_intermediate(pt), atol=1e-15)
    # the default phase only flips the sign of the mass entries
    z4 = np.diag([1, -1, 1, -1])
    np.testing.assert_allclose(rephased_intermediate(pt), z4 @ assemble_intermediate(pt) @ z4, atol=1e-15)


def test_sigma_conjugation():
    s = sigma_permutation()
    np.testing.assert_array_equal(s @ s, I4)
    p, m = 3.0, 4.0
    interleaved = np.array([[p, 0, -m, 0], [0, -p, 0, -m], [-m, 0, -p, 0], [0, -m, 0, p]])
    h = assemble_intermediate(MomentumPoint.along_z(p, 5.0, m))
    np.testing.assert_array_equal(sigma_conjugate(h), interleaved)
    np.testing.assert_allclose(eig4(sigma_conjugate(h)), eig4(h), atol=1e-14)


# --- rotation chain ------------------------------------------------------------------


def test_rotation_examples():
    np.testing.assert_array_equal(rotate_momentum_block((0, 0, 5)), np.diag([5, -5]))
    np.testing.assert_allclose(rotate_momentum_block((1, 2, 2)), [[2, 1 - 2j], [1 + 2j, -2]], atol=1e-15)
    np.testing.assert_allclose(rotate_momentum_block((0, 0, -5)), np.diag([-5, 5]), atol=1e-15)
    np.testing.assert_array_equal(rotate_momentum_block((0, 0, 0)), np.zeros((2, 2)))
    _, tilted = rotate_momentum_block((3, 4, 0), return_intermediate=True)
    np.testing.assert_allclose(tilted, [[0, 5], [5, 0]], atol=1e-15)


def test_u_theta_reflection():
    for th in np.linspace(-6, 6, 13):
        u = u_theta(th)
        np.testing.assert_allclose(u @ u, I2, atol=1e-15)
        assert np.linalg.det(u) == pytest.approx(-1)


@settings(max_examples=300, deadline=None)
@given(p=momentum)
def test_rotation_equals_sigma_dot(p):
    scale = max(1.0, max(abs(c) for c in p))
    np.testing.assert_allclose(rotate_momentum_block(p), sigma_dot(p), atol=1e-14 * scale)
    u = u_phi(math.atan2(p[1], p[0]))
    np.testing.assert_allclose(u @ u.conj().T, I2, atol=1e-15)


def test_sigma_dot_cases():
    np.testing.assert_array_equal(sigma_dot((1, 0, 0)), SIGMA_X)
    np.testing.assert_array_equal(sigma_dot((0, 1, 0)), SIGMA_Y)
    np.testing.assert_array_equal(sigma_dot((0, 0, 1)), SIGMA_Z)


def test_bilinearization_examples():
    assert bilinearization_residual((1, 2, 2)) <= 1e-13
    assert bilinearization_residual((0, 0, 0)) == 0.0


@settings(max_examples=300, deadline=None)
@given(p=momentum)
def test_bilinearization_property(p):
    assert bilinearization_residual(p) <= 1e-12 * max(1.0, sum(c * c for c in p))


# --- Dirac form -----------------------------------------------------------------------


def test_dirac_examples():
    np.testing.assert_allclose(dirac_form((0, 0, 0), 1.0), np.diag([1, 1, -1, -1]), atol=1e-15)
    h = dirac_form((3, 0, 4), 0.0)
    np.testing.assert_allclose(h[:2, 2:], [[4, 3], [3, -4]], atol=1e-14)
    np.testing.assert_allclose(h[:2, :2], 0, atol=1e-15)
    np.testing.assert_allclose(eig4(dirac_form((1, 2, 2), 4.0)), [5, 5, -5, -5], atol=1e-12)


def test_block_hadamard_orthogonal():
    r = block_hadamard()
    np.testing.assert_allclose(r @ r.T, I4, atol=1e-15)


@settings(max_examples=300, deadline=None)
@given(p=momentum, m=mass)
def test_dirac_form_matches_alpha_beta(p, m):
    ax, ay, az = dirac_alpha()
    expected = p[0] * ax + p[1] * ay + p[2] * az + m * dirac_beta()
    scale = max(1.0, m, *map(abs, p))
    np.testing.assert_allclose(dirac_form(p, m), expected, atol=1e-14 * scale)
    e = math.sqrt(sum(c * c for c in p) + m * m)
    np.testing.assert_allclose(eig4(dirac_form(p, m)), [e, e, -e, -e], atol=1e-12 * scale)


def test_block_rotation_diagonalises_pre_dirac():
    p, m = (0.3, -1.2, 0.8), 0.9
    u = block_rotation(p)
    pmag = math.sqrt(sum(c * c for c in p))
    diag = np.block([[np.diag([pmag, -pmag]), -m * I2], [-m * I2, -np.diag([pmag, -pmag])]])
    np.testing.assert_allclose(u @ diag @ u.conj().T, pre_dirac_form(p, m), atol=1e-14)


def test_eig4_examples():
    np.testing.assert_array_equal(eig4(np.diag([1.0, 2.0, 3.0, 4.0])), [4, 3, 2, 1])
    np.testing.assert_array_equal(eig4(np.zeros((4, 4))), [0, 0, 0, 0])
    with pytest.raises(ValueError):
        eig4(np.triu(np.ones((4, 4))))
    with pytest.raises(ValueError):
        eig4(np.eye(3))


def test_on_shell_spinor():
    for branch in (1, -1):
        e, v = on_shell_spinor((0.5, -1, 2), 1.5, branch)
        np.testing.assert_allclose(dirac_form((0.5, -1, 2), 1.5) @ v, e * v, atol=1e-13)
        assert e == pytest.approx(branch * math.sqrt(0.25 + 1 + 4 + 2.25))
