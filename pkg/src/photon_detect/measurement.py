"""
Indirect measurement: object (photons) x apparatus (detector atom), a
unitary interaction, then a projective meter readout on the apparatus.

Exact route: ``U`` from :func:`exact_propagator`, then
``p_r = Tr(P_r U (rho x sigma) U^dagger)`` and the reduced post state.
First-order route: ``K = int H_int dt`` replaces ``U`` (:func:`dyson_first_order_prob`).
Detection-operator route: ``p_r = Tr(D^dagger D rho)``, post state ``D rho D^dagger / p_r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .detector import AtomSpec, Coupling, DetectionOperator, InteractionHamiltonian, TimeWindow
from .errors import NumericError, OutcomeImpossibleError, ShapeError
from .fock import (HERMITIAN_TOL, FockSpace, QOperator, QState, partial_trace_apparatus, tensor)
from .modes import ModeSet

IMAG_TOL = 1e-9
DEFAULT_STEPS = 2000


@dataclass(frozen=True)
class Meter:
    """Projection-valued meter on the apparatus factor: M = sum_r m_r P_r."""

    projectors: tuple[np.ndarray, ...] = field(repr=False)
    values: tuple[float, ...]

    def __post_init__(self):
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        if len(projs) != len(self.values) or not projs:
            raise ValueError("meter needs one value per projector and at least one outcome")
        d = projs[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for p in projs:
            if p.shape != (d, d):
                raise ShapeError("meter projectors have inconsistent shapes")
            if np.max(np.abs(p - p.conj().T)) > HERMITIAN_TOL or np.max(np.abs(p @ p - p)) > HERMITIAN_TOL:
                raise ValueError("meter element is not an orthogonal projector")
            total += p
        if np.max(np.abs(total - np.eye(d))) > HERMITIAN_TOL:
            raise ValueError("meter projectors do not sum to the identity")
        for p in projs:
            p.flags.writeable = False
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def observable(self) -> np.ndarray:
        return sum(v * p for v, p in zip(self.values, self.projectors))

    def __len__(self):
        return len(self.projectors)

    def __getitem__(self, r: int) -> np.ndarray:
        return self.projectors[r]


def level_projector(atom: AtomSpec, level: int) -> np.ndarray:
    p = np.zeros((atom.dim, atom.dim), dtype=complex)
    p[level, level] = 1.0
    return p


def energy_meter(atom: AtomSpec) -> Meter:
    """Readout of the atom's energy level: one projector per level, ground first."""
    energies = [atom.ground_energy] + [tr.energy for tr in atom.transitions]
    return Meter(tuple(level_projector(atom, i) for i in range(atom.dim)), tuple(energies))


def ground_state(atom: AtomSpec) -> QState:
    return QState(FockSpace((), (atom.dim,)), level_projector(atom, 0))


@dataclass(frozen=True)
class MeasurementOutcome:
    probability: float
    post_state: QState


def _unitary_exp(h: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def exact_propagator(ms: ModeSet, joint: FockSpace, atom: AtomSpec, window: TimeWindow,
                     steps: int = DEFAULT_STEPS, coupling: Coupling = "multipolar") -> QOperator:
    """Time-ordered exponential as an ordered product of midpoint step exponentials."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    ham = InteractionHamiltonian(ms, joint, atom, coupling)
    dt = window.length / steps
    u = np.eye(joint.dim, dtype=complex)
    for n in range(steps):
        h = ham(window.t0 + (n + 0.5) * dt)
        if not np.all(np.isfinite(h)):
            raise NumericError(f"non-finite Hamiltonian entries at step {n}")
        u = _unitary_exp(h, dt) @ u
    return QOperator(joint, u)


def _as_apparatus(p_r, joint: FockSpace) -> np.ndarray:
    mat = p_r.matrix if isinstance(p_r, QOperator) else np.asarray(p_r, dtype=complex)
    if mat.shape == (joint.apparatus_dim,) * 2:
        return np.kron(np.eye(joint.photon_dim), mat)
    if mat.shape == (joint.dim,) * 2:
        return mat
    raise ShapeError(f"projector of shape {mat.shape} fits neither the apparatus nor the joint space")


def _evolve(u: QOperator, rho: QState, sigma: QState) -> np.ndarray:
    joint = u.space
    if rho.space.dim != joint.photon_dim or sigma.space.dim != joint.apparatus_dim:
        raise ShapeError("object and apparatus states do not compose to the propagator's space")
    state = tensor(rho, sigma, joint).matrix
    return u.matrix @ state @ u.matrix.conj().T


def _real_probability(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise NumericError(f"{what} has imaginary residue {value.imag:.3e}")
    return value.real


def born_probability(p_r, u: QOperator, rho: QState, sigma: QState) -> float:
    """Tr(P_r U (rho x sigma) U^dagger), clipped to [0, 1]."""
    proj = _as_apparatus(p_r, u.space)
    value = complex(np.einsum("ij,ji->", proj, _evolve(u, rho, sigma)))
    return float(np.clip(_real_probability(value, "Born probability"), 0.0, 1.0))


def post_measurement_state(p_r, u: QOperator, rho: QState, sigma: QState) -> MeasurementOutcome:
    """Normalized reduced object state after reading outcome r."""
    proj = _as_apparatus(p_r, u.space)
    unnorm = proj @ _evolve(u, rho, sigma)
    p = _real_probability(complex(np.trace(unnorm)), "Born probability")
    if p <= 1e-12:
        raise OutcomeImpossibleError(p)
    reduced = partial_trace_apparatus(QOperator(u.space, unnorm)).matrix / p
    # exact result is Hermitian; drop roundoff asymmetry
    reduced = 0.5 * (reduced + reduced.conj().T)
    return MeasurementOutcome(float(min(p, 1.0)), QState(rho.space, reduced))


def _gauss_integral(ham: InteractionHamiltonian, window: TimeWindow, panels: int, order: int = 8):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(window.t0, window.t1, panels + 1)
    alpha_sum = beta_sum = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        for x, w in zip(nodes, weights):
            alpha, beta = ham.coefficients(mid + half * x)
            alpha_sum = alpha_sum + w * half * alpha
            beta_sum = beta_sum + w * half * beta
    return alpha_sum, beta_sum


def integrated_hamiltonian(ms: ModeSet, joint: FockSpace, atom: AtomSpec, window: TimeWindow,
                           panels: int, coupling: Coupling = "multipolar") -> np.ndarray:
    """K = int_{t0}^{t1} H_int(t) dt by composite 8-point Gauss-Legendre quadrature."""
    ham = InteractionHamiltonian(ms, joint, atom, coupling)
    alpha, beta = _gauss_integral(ham, window, panels)
    up = np.tensordot(alpha, ham._ops_a, axes=([0, 1], [0, 1])) \
        + np.tensordot(beta, ham._ops_c, axes=([0, 1], [0, 1]))
    return -atom.coupling * (up + up.conj().T)


def _default_panels(atom: AtomSpec, ms: ModeSet, window: TimeWindow) -> int:
    top = max(tr.energy - atom.ground_energy for tr in atom.transitions) + ms.frequencies.max()
    return max(16, int(np.ceil(window.length * top / 2.0)))


def dyson_first_order_prob(ms: ModeSet, joint: FockSpace, atom: AtomSpec, window: TimeWindow,
                           p_r, rho: QState, sigma: QState, quadrature_steps: int | None = None,
                           coupling: Coupling = "multipolar") -> float:
    """First-order estimate Tr(P_r K (rho x sigma) K^dagger), K = int H_int dt.

    The result is the raw perturbative number, not renormalized.  The
    quadrature is repeated with twice the panels; a relative change above
    1e-8 raises :class:`NumericError`.
    """
    panels = quadrature_steps or _default_panels(atom, ms, window)
    proj = _as_apparatus(p_r, joint)
    state = tensor(rho, sigma, joint).matrix

    def prob(n):
        k = integrated_hamiltonian(ms, joint, atom, window, n, coupling)
        value = complex(np.einsum("ij,ji->", proj, k @ state @ k.conj().T))
        return _real_probability(value, "first-order probability")

    coarse, fine = prob(panels), prob(2 * panels)
    scale = max(abs(fine), 1e-300)
    if abs(fine - coarse) > 1e-8 * scale and abs(fine - coarse) > 1e-300:
        raise NumericError(
            f"first-order quadrature not converged: {coarse!r} vs {fine!r} with {panels} and {2 * panels} panels")
    return float(fine)


def detect_prob(det: DetectionOperator | QOperator, rho: QState, clip: bool = True) -> float:
    """Tr(D^dagger D rho)."""
    d = det.op if isinstance(det, DetectionOperator) else det
    if d.space != rho.space:
        raise ShapeError("detection operator and state live on different spaces")
    dd = d.matrix.conj().T @ d.matrix
    p = _real_probability(complex(np.einsum("ij,ji->", dd, rho.density)), "detection probability")
    if p < -1e-12:
        raise NumericError(f"detection probability {p:.3e} is negative beyond tolerance")
    return float(np.clip(p, 0.0, 1.0)) if clip else float(p)


def detect_post(det: DetectionOperator | QOperator, rho: QState) -> QState:
    """D rho D^dagger / p."""
    d = det.op if isinstance(det, DetectionOperator) else det
    out = d.matrix @ rho.density @ d.matrix.conj().T
    p = float(np.real(np.trace(out)))
    if p <= 1e-15:
        raise OutcomeImpossibleError(p)
    out = out / p
    return QState(rho.space, 0.5 * (out + out.conj().T))


def meter_probabilities(meter: Meter, u: QOperator, rho: QState, sigma: QState) -> list[float]:
    return [born_probability(p, u, rho, sigma) for p in meter.projectors]


def one_photon_state(space: FockSpace, amplitudes: Sequence[complex]) -> QState:
    """Single-photon superposition sum_mu c_mu |1_mu> on a photon space."""
    if len(amplitudes) != space.n_modes:
        raise ShapeError("need one amplitude per mode")
    psi = np.zeros(space.dim, dtype=complex)
    for mu, c in enumerate(amplitudes):
        label = [0] * space.n_modes
        label[mu] = 1
        psi[space.index(label)] = c
    return QState.pure(space, psi)
