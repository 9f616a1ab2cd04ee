import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photon_detect.detector import (AtomSpec, TimeWindow, Transition, counter_rotating_bound, current_fourier,
                                    detection_operator_current, detection_operator_dipole,
                                    interaction_hamiltonian, joint_space, random_atom, two_level_atom,
                                    vacuum_norm_sq, window_factor)
from photon_detect.errors import ConfigurationError
from photon_detect.fock import make_space, vacuum
from photon_detect.modes import ModeSet, mode_grid, plane_wave_mode


def _random_modes(rng, n_k=2, volume=None):
    return mode_grid(rng.normal(size=(n_k, 3)), volume or float(rng.uniform(0.5, 3.0)))


def test_window_factor_matches_quadrature():
    from scipy.integrate import quad
    w = TimeWindow(-1.1, 3.4)
    for nu in (0.0, 0.37, -2.5, 7.0):
        re = quad(lambda t: np.cos(nu * t), w.t0, w.t1, limit=200)[0]
        im = quad(lambda t: np.sin(nu * t), w.t0, w.t1, limit=200)[0]
        assert abs(window_factor(nu, w) - (re + 1j * im)) < 1e-12


def test_atom_validation():
    with pytest.raises(ConfigurationError):
        AtomSpec([0, 0, 0], 1.0, (Transition("e", 0.5, [1, 0, 0]),))
    with pytest.raises(ConfigurationError):
        Transition("e", 1.0)
    with pytest.raises(ConfigurationError):
        two_level_atom(dipole_e=[1, 0, 0], coupling=-1.0)
    with pytest.raises(ValueError):
        TimeWindow(1.0, 1.0)
    atom = two_level_atom(dipole_e=[1, 0, 0])
    with pytest.raises(KeyError):
        current_fourier(atom, "nope", [0, 0, 1])


def test_current_fourier_point_dipoles(rng):
    d = rng.normal(size=3) + 1j * rng.normal(size=3)
    m = rng.normal(size=3) + 1j * rng.normal(size=3)
    atom = AtomSpec([0, 0, 0], -0.5, (Transition("e", 1.0, d, np.zeros(3)),), 0.7)
    for k in rng.normal(size=(3, 3)):
        np.testing.assert_allclose(current_fourier(atom, "e", k), 1j * 1.5 * 0.7 * d)
    mag = AtomSpec(rng.normal(size=3), 0.0, (Transition("e", 1.0, np.zeros(3), m),), 1.0)
    for k in rng.normal(size=(3, 3)):
        assert abs(np.dot(k, current_fourier(mag, "e", k))) < 1e-13
    # both dipoles, hand evaluation of g[i gap d - i k x m] e^{i k.x0}
    x0 = np.array([0.3, -0.2, 0.5])
    k = np.array([1.0, 2.0, -1.0])
    both = AtomSpec(x0, 0.0, (Transition("e", 2.0, [1, 0, 0], [0, 1, 0]),), 1.0)
    expected = (1j * 2.0 * np.array([1, 0, 0]) - 1j * np.array([1.0, 0.0, 1.0])) * np.exp(1j * (k @ x0))
    np.testing.assert_allclose(current_fourier(both, "e", k), expected, atol=1e-15)


def test_rwa_operator_annihilates_vacuum(rng):
    ms = _random_modes(rng)
    sp = make_space([1] * len(ms))
    atom = random_atom(rng)
    det = detection_operator_current(ms, sp, atom, "e0", TimeWindow(0, 5), rwa=True)
    assert np.all(det.op.apply(vacuum(sp)) == 0)
    assert vacuum_norm_sq(det) == 0


def test_resonant_coefficient_linear_in_window():
    ms = ModeSet((plane_wave_mode([0, 0, 1.3], 1),), 1.0)
    sp = make_space([1])
    atom = two_level_atom(gap=1.3, dipole_e=[1, 0, 0], coupling=0.2)
    c = [abs(detection_operator_current(ms, sp, atom, "e", TimeWindow(0, T)).plus[0]) for T in (1, 2, 4)]
    assert c[1] / c[0] == pytest.approx(2, rel=1e-13) and c[2] / c[0] == pytest.approx(4, rel=1e-13)


def test_sinc_zero_of_window():
    omega, T = 1.0, 4.0
    gap = omega + 2 * np.pi / T
    ms = ModeSet((plane_wave_mode([0, 0, omega], 1),), 1.0)
    atom = two_level_atom(gap=gap, dipole_e=[1, 0, 0])
    det = detection_operator_dipole(ms, make_space([1]), atom, "e", TimeWindow.centered(T))
    assert abs(det.plus[0]) < 1e-15


def test_dipole_route_examples():
    ms = ModeSet((plane_wave_mode([0, 0, 1], 1),), 2.0)
    sp = make_space([1])
    w = TimeWindow(0, 3)
    # eps = x_hat, d along y: orthogonal electric coupling, no magnetic moment
    off = two_level_atom(dipole_e=[0, 1, 0])
    assert np.all(detection_operator_dipole(ms, sp, off, "e", w, rwa=False).op.matrix == 0)
    # k x eps = z x x = y; m along y
    mag = two_level_atom(gap=1.4, dipole_m=[0, 2.0, 0], coupling=0.3)
    det = detection_operator_dipole(ms, sp, mag, "e", w)
    expected = 0.3 * 2.0 * abs(window_factor(1.4 - 1.0, w)) / np.sqrt(2 * 1.0 * 2.0)
    assert abs(det.plus[0]) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rwa=st.booleans(), t0=st.floats(-20, 20), length=st.floats(0.01, 40))
def test_cross_route_equality(seed, rwa, t0, length):
    rng = np.random.default_rng(seed)
    ms = _random_modes(rng, n_k=int(rng.integers(1, 3)))
    sp = make_space([1] * len(ms))
    atom = random_atom(rng, n_levels=2)
    w = TimeWindow(t0, t0 + length)
    for label in ("e0", "e1"):
        a = detection_operator_current(ms, sp, atom, label, w, rwa).op.matrix
        b = detection_operator_dipole(ms, sp, atom, label, w, rwa, boundary_terms=True).op.matrix
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


def test_bare_dipole_route_equals_current_on_resonance():
    ms = ModeSet((plane_wave_mode([0.6, 0, 0.8], 2),), 1.0)
    sp = make_space([1])
    atom = AtomSpec([0.1, 0.2, 0.3], 0.0, (Transition("e", 1.0, [0.3, 1j, 0.2], [0.5, 0, -0.2]),), 0.4)
    w = TimeWindow(-2, 7)
    a = detection_operator_current(ms, sp, atom, "e", w).op.matrix
    b = detection_operator_dipole(ms, sp, atom, "e", w).op.matrix
    assert np.max(np.abs(a - b)) < 1e-14


def test_boundary_term_bounded_in_window():
    ms = ModeSet((plane_wave_mode([0, 0, 1.0], 1),), 1.0)
    sp = make_space([1])
    atom = two_level_atom(gap=1.5, dipole_e=[1, 0, 0])
    diffs = []
    for T in (1, 10, 100, 1000):
        w = TimeWindow(0, T)
        diffs.append(abs(detection_operator_current(ms, sp, atom, "e", w).plus[0]
                         - detection_operator_dipole(ms, sp, atom, "e", w).plus[0]))
    bound = 2 * 1.0 / np.sqrt(2.0)
    assert max(diffs) <= bound + 1e-12


def test_counter_rotating_bound(rng):
    ms = _random_modes(rng, 3)
    sp = make_space([1] * len(ms))
    atom = random_atom(rng)
    bound = counter_rotating_bound(ms, atom, "e0")
    for T in (0.1, 1, 10, 100, 1000):
        det = detection_operator_current(ms, sp, atom, "e0", TimeWindow(0, T), rwa=False)
        assert vacuum_norm_sq(det) <= bound * (1 + 1e-12)


def test_linear_in_coupling_and_window_covariance(rng):
    ms = _random_modes(rng)
    sp = make_space([1] * len(ms))
    atom = random_atom(rng)
    w = TimeWindow(-0.5, 2.5)
    base = detection_operator_current(ms, sp, atom, "e0", w, rwa=False)
    scaled = detection_operator_current(ms, sp, atom.with_coupling(3 * atom.coupling), "e0", w, rwa=False)
    np.testing.assert_allclose(scaled.op.matrix, 3 * base.op.matrix, rtol=1e-14, atol=1e-15)
    shifted = detection_operator_current(ms, sp, atom, "e0", TimeWindow(w.t0 + 4.2, w.t1 + 4.2), rwa=False)
    np.testing.assert_allclose(np.abs(shifted.plus), np.abs(base.plus), rtol=1e-13)
    np.testing.assert_allclose(np.abs(shifted.minus), np.abs(base.minus), rtol=1e-13)


def test_interaction_hamiltonian_explicit_matrix():
    # one mode (cutoff 3) x two-level atom = 8 x 8; at t = 0 and x0 = 0 the E+ coefficient is i w eps / sqrt(2 w V)
    omega, V, g = 1.0, 2.0, 0.5
    ms = ModeSet((plane_wave_mode([0, 0, omega], 1),), V)
    atom = two_level_atom(gap=1.0, dipole_e=[0.8, 0.0, 0.0], coupling=g)
    joint = make_space([3], [2])
    h = interaction_hamiltonian(ms, joint, atom, 0.0).matrix
    c = 1j * omega * 0.8 / np.sqrt(2 * omega * V)
    a = np.diag(np.sqrt([1.0, 2.0, 3.0]), 1)
    up = np.array([[0, 0], [1, 0]])
    expected_up = np.kron(c * a + np.conj(c) * a.T, up)
    expected = -g * (expected_up + expected_up.conj().T)
    np.testing.assert_allclose(h, expected, atol=1e-15)
    assert np.max(np.abs(h - h.conj().T)) <= 1e-13
    for i, (n, s) in enumerate(joint.basis()):
        for j, (m, r) in enumerate(joint.basis()):
            if h[i, j] != 0:
                assert s != r and abs(n - m) == 1
    assert h[0, 0] == 0


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(-10, 10))
def test_interaction_hamiltonian_hermitian(seed, t):
    rng = np.random.default_rng(seed)
    ms = _random_modes(rng, 1)
    atom = random_atom(rng, n_levels=2)
    joint = joint_space(make_space([1, 1]), atom)
    for form in ("multipolar", "minimal"):
        h = interaction_hamiltonian(ms, joint, atom, t, form).matrix
        assert np.max(np.abs(h - h.conj().T)) <= 1e-13


def test_interaction_hamiltonian_space_check():
    ms = ModeSet((plane_wave_mode([0, 0, 1], 1),), 1.0)
    atom = two_level_atom(dipole_e=[1, 0, 0])
    with pytest.raises(ConfigurationError):
        interaction_hamiltonian(ms, make_space([1], [3]), atom, 0.0)
    with pytest.raises(ConfigurationError):
        interaction_hamiltonian(ms, make_space([1, 1], [2]), atom, 0.0)
    assert joint_space(make_space([1]), atom) == make_space([1], [2])


def test_detection_operator_requires_photon_space(rng):
    ms = _random_modes(rng, 1)
    atom = random_atom(rng)
    with pytest.raises(ConfigurationError):
        detection_operator_current(ms, make_space([1, 1], [2]), atom, "e0", TimeWindow(0, 1))
    with pytest.raises(ConfigurationError):
        detection_operator_dipole(ms, make_space([1]), atom, "e0", TimeWindow(0, 1))
