"""
Point detector atoms and the photon detection operator.

A detector atom sits at ``position`` with a ground level and one or more
excited levels.  Each excitation ``r`` carries electric and magnetic
transition dipoles ``<r|d|0>`` and ``<r|m|0>``, both multiplied by the
coupling scale ``g``.  The atom factor of a joint space has dimension
``1 + len(transitions)``: index 0 is the ground level, index ``i + 1`` the
upper level of ``transitions[i]``.

Three constructions of the detection operator D_r on the photon space are
provided:

* :func:`detection_operator_current` -- from the Fourier transformed
  transition current J_kr of the point dipole (minimal coupling A.J);
* :func:`detection_operator_dipole` -- from E.d + B.m; with
  ``boundary_terms=True`` the temporal boundary remainder of the
  integration by parts is added back, which makes it equal to the current
  route for any window;
* :func:`interaction_hamiltonian` -- the interaction-picture Hamiltonian on
  photon x atom whose first-order Dyson term reproduces D_r.

All time integrals use the closed form
``W(nu) = int_{t0}^{t1} exp(i nu t) dt``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import ConfigurationError
from .fock import FockSpace, QOperator, annihilation_op, vacuum
from .modes import Field, ModeSet, _check_space, _vec3, field_coefficients

Coupling = Literal["multipolar", "minimal"]


@dataclass(frozen=True)
class Transition:
    label: str
    energy: float
    dipole_e: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=complex))
    dipole_m: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=complex))

    def __post_init__(self):
        d = _vec3(self.dipole_e, complex)
        m = _vec3(self.dipole_m, complex)
        if not (np.any(d != 0) or np.any(m != 0)):
            raise ConfigurationError(f"transition {self.label!r} has neither electric nor magnetic dipole")
        d.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "dipole_e", d)
        object.__setattr__(self, "dipole_m", m)
        object.__setattr__(self, "energy", float(self.energy))


@dataclass(frozen=True)
class AtomSpec:
    """Pointlike detector atom."""

    position: np.ndarray
    ground_energy: float
    transitions: tuple[Transition, ...]
    coupling: float = 1.0

    def __post_init__(self):
        pos = _vec3(self.position)
        pos.flags.writeable = False
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if not self.transitions:
            raise ConfigurationError("atom needs at least one excited level")
        if not (np.isfinite(self.coupling) and self.coupling >= 0):
            raise ConfigurationError(f"coupling scale must be finite and >= 0, got {self.coupling}")
        labels = [tr.label for tr in self.transitions]
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"duplicate level labels {labels}")
        for tr in self.transitions:
            if not tr.energy > self.ground_energy:
                raise ConfigurationError(
                    f"level {tr.label!r} energy {tr.energy} is not above the ground energy {self.ground_energy}")

    @property
    def dim(self) -> int:
        return 1 + len(self.transitions)

    def level_index(self, label: str) -> int:
        for i, tr in enumerate(self.transitions):
            if tr.label == label:
                return i + 1
        raise KeyError(f"unknown transition {label!r}")

    def transition(self, label: str) -> Transition:
        return self.transitions[self.level_index(label) - 1]

    def gap(self, label: str) -> float:
        return self.transition(label).energy - self.ground_energy

    def with_coupling(self, g: float) -> AtomSpec:
        return AtomSpec(self.position, self.ground_energy, self.transitions, g)

    def moved_to(self, position) -> AtomSpec:
        return AtomSpec(position, self.ground_energy, self.transitions, self.coupling)


def two_level_atom(position=(0.0, 0.0, 0.0), gap: float = 1.0, dipole_e=(0, 0, 0), dipole_m=(0, 0, 0),
                   coupling: float = 1.0, label: str = "e") -> AtomSpec:
    return AtomSpec(position, 0.0, (Transition(label, gap, dipole_e, dipole_m),), coupling)


@dataclass(frozen=True)
class TimeWindow:
    t0: float
    t1: float

    def __post_init__(self):
        if not (np.isfinite(self.t0) and np.isfinite(self.t1)) or not self.t1 > self.t0:
            raise ValueError(f"time window needs finite t1 > t0, got [{self.t0}, {self.t1}]")

    @property
    def length(self) -> float:
        return self.t1 - self.t0

    @property
    def center(self) -> float:
        return 0.5 * (self.t0 + self.t1)

    @classmethod
    def centered(cls, length: float, center: float = 0.0) -> TimeWindow:
        return cls(center - 0.5 * length, center + 0.5 * length)


@dataclass(frozen=True)
class DetectionOperator:
    op: QOperator
    transition: str
    window: TimeWindow
    rwa: bool
    plus: np.ndarray = field(repr=False)
    minus: np.ndarray = field(repr=False)
    """Per-mode coefficients of a_mu and a_mu^dagger (``minus`` is zero under RWA)."""


def window_factor(nu, window: TimeWindow) -> np.ndarray:
    """W(nu) = int_{t0}^{t1} exp(i nu t) dt = T exp(i nu tc) sinc(nu T / 2)."""
    nu = np.asarray(nu, dtype=float)
    T = window.length
    return T * np.exp(1j * nu * window.center) * np.sinc(nu * T / (2 * np.pi))


def _edge_difference(nu, window: TimeWindow) -> np.ndarray:
    """exp(i nu t1) - exp(i nu t0), i.e. i nu W(nu)."""
    nu = np.asarray(nu, dtype=float)
    return np.exp(1j * nu * window.t1) - np.exp(1j * nu * window.t0)


def current_fourier(atom: AtomSpec, transition: str, k) -> np.ndarray:
    """J_kr = int <r|J(x,0)|0> exp(i k.x) d^3x for the point dipole current dd/dt + curl m.

    The electric part uses <r|dd/dt|0> = +i gap d_r0.
    """
    tr = atom.transition(transition)
    k = _vec3(k)
    gap = tr.energy - atom.ground_energy
    return atom.coupling * (1j * gap * tr.dipole_e - 1j * np.cross(k, tr.dipole_m)) \
        * np.exp(1j * np.dot(k, atom.position))


def _assemble(space: FockSpace, plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for mu in range(space.n_modes):
        a = annihilation_op(space, mu).matrix
        if plus[mu] != 0:
            mat += plus[mu] * a
        if minus[mu] != 0:
            mat += minus[mu] * a.conj().T
    return mat


def _photon_space_check(ms: ModeSet, space: FockSpace):
    _check_space(ms, space)
    if space.atom_dims:
        raise ConfigurationError("detection operators act on the photon space only")


def detection_operator_current(ms: ModeSet, space: FockSpace, atom: AtomSpec, transition: str,
                               window: TimeWindow, rwa: bool = True) -> DetectionOperator:
    _photon_space_check(ms, space)
    gap = atom.gap(transition)
    norm = 1.0 / np.sqrt(2.0 * ms.frequencies * ms.volume)
    plus = np.empty(len(ms), dtype=complex)
    minus = np.zeros(len(ms), dtype=complex)
    for mu, mode in enumerate(ms.modes):
        plus[mu] = np.dot(mode.eps, current_fourier(atom, transition, mode.k)) \
            * window_factor(gap - mode.omega, window) * norm[mu]
        if not rwa:
            minus[mu] = np.dot(mode.eps.conj(), current_fourier(atom, transition, -mode.k)) \
                * window_factor(gap + mode.omega, window) * norm[mu]
    return DetectionOperator(QOperator(space, _assemble(space, plus, minus)), transition, window, rwa, plus, minus)


def detection_operator_dipole(ms: ModeSet, space: FockSpace, atom: AtomSpec, transition: str,
                              window: TimeWindow, rwa: bool = True,
                              boundary_terms: bool = False) -> DetectionOperator:
    """Detection operator from the E.d + B.m coupling at the atom position.

    ``boundary_terms`` adds g [A(x0,t).d exp(i gap t)] evaluated between the
    window edges, the remainder dropped when -A.dd/dt is integrated by parts
    into E.d.  It vanishes on resonance and is bounded in the window length.
    """
    _photon_space_check(ms, space)
    tr = atom.transition(transition)
    gap = atom.gap(transition)
    g = atom.coupling
    omegas = ms.frequencies
    e_plus = field_coefficients(ms, Field.E, atom.position, 0.0)
    b_plus = field_coefficients(ms, Field.B, atom.position, 0.0)
    plus = g * (e_plus @ tr.dipole_e + b_plus @ tr.dipole_m) * window_factor(gap - omegas, window)
    if rwa:
        minus = np.zeros(len(ms), dtype=complex)
    else:
        minus = g * (e_plus.conj() @ tr.dipole_e + b_plus.conj() @ tr.dipole_m) \
            * window_factor(gap + omegas, window)
    if boundary_terms:
        a_plus = field_coefficients(ms, Field.A, atom.position, 0.0)
        plus = plus + g * (a_plus @ tr.dipole_e) * _edge_difference(gap - omegas, window)
        if not rwa:
            minus = minus + g * (a_plus.conj() @ tr.dipole_e) * _edge_difference(gap + omegas, window)
    return DetectionOperator(QOperator(space, _assemble(space, plus, minus)), transition, window, rwa, plus, minus)


def counter_rotating_bound(ms: ModeSet, atom: AtomSpec, transition: str) -> float:
    """Window-independent upper bound on ||D|vac>||^2 for the non-RWA current-route operator."""
    gap = atom.gap(transition)
    total = 0.0
    for mode in ms.modes:
        amp = np.dot(mode.eps.conj(), current_fourier(atom, transition, -mode.k))
        total += abs(amp) ** 2 * 4.0 / ((gap + mode.omega) ** 2 * 2.0 * mode.omega * ms.volume)
    return float(total)


class InteractionHamiltonian:
    """Interaction-picture H_int(t) on photon x atom, callable as ``H(t)`` -> matrix.

    ``coupling="multipolar"`` uses -(E.d + B.m); ``"minimal"`` uses -A.J with the
    point-dipole current (electric part i gap d, magnetic part through B.m).
    Ladder structures are precomputed so each call is a small contraction.
    """

    def __init__(self, ms: ModeSet, joint: FockSpace, atom: AtomSpec, coupling: Coupling = "multipolar"):
        _check_space(ms, joint)
        if joint.atom_dims != (atom.dim,):
            raise ConfigurationError(
                f"joint space needs exactly one atom factor of dimension {atom.dim}, has {joint.atom_dims}")
        if coupling not in ("multipolar", "minimal"):
            raise ValueError(f"unknown coupling form {coupling!r}")
        self.ms, self.joint, self.atom, self.coupling = ms, joint, atom, coupling
        n_lv = atom.dim
        dh = joint.photon_dim
        photon = joint.photon_space()
        terms_a, terms_c = [], []
        for mu in range(len(ms)):
            a = annihilation_op(photon, mu).matrix
            for r in range(1, n_lv):
                raise_r = np.zeros((n_lv, n_lv), dtype=complex)
                raise_r[r, 0] = 1.0
                terms_a.append(np.kron(a, raise_r))
                terms_c.append(np.kron(a.conj().T, raise_r))
        self._ops_a = np.array(terms_a).reshape(len(ms), n_lv - 1, dh * n_lv, dh * n_lv)
        self._ops_c = np.array(terms_c).reshape(len(ms), n_lv - 1, dh * n_lv, dh * n_lv)
        self._gaps = np.array([tr.energy - atom.ground_energy for tr in atom.transitions])
        d = np.array([tr.dipole_e for tr in atom.transitions])
        m = np.array([tr.dipole_m for tr in atom.transitions])
        self._d_eff = d if coupling == "multipolar" else 1j * self._gaps[:, None] * d
        self._m = m

    def coefficients(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients of a_mu|r><0| and a_mu^dagger|r><0| in -H_int(t)/g, shape (modes, levels)."""
        first = Field.E if self.coupling == "multipolar" else Field.A
        f_plus = field_coefficients(self.ms, first, self.atom.position, t)
        b_plus = field_coefficients(self.ms, Field.B, self.atom.position, t)
        rot = np.exp(1j * self._gaps * t)
        alpha = (f_plus @ self._d_eff.T + b_plus @ self._m.T) * rot[None, :]
        beta = (f_plus.conj() @ self._d_eff.T + b_plus.conj() @ self._m.T) * rot[None, :]
        return alpha, beta

    def __call__(self, t: float) -> np.ndarray:
        alpha, beta = self.coefficients(t)
        up = np.tensordot(alpha, self._ops_a, axes=([0, 1], [0, 1])) \
            + np.tensordot(beta, self._ops_c, axes=([0, 1], [0, 1]))
        return -self.atom.coupling * (up + up.conj().T)


def interaction_hamiltonian(ms: ModeSet, joint: FockSpace, atom: AtomSpec, t: float,
                            coupling: Coupling = "multipolar") -> QOperator:
    return QOperator(joint, InteractionHamiltonian(ms, joint, atom, coupling)(t))


def vacuum_norm_sq(det: DetectionOperator) -> float:
    """||D|vac>||^2."""
    v = det.op.apply(vacuum(det.op.space))
    return float(np.real(np.vdot(v, v)))


def joint_space(photon: FockSpace, atom: AtomSpec) -> FockSpace:
    return FockSpace(photon.cutoffs, (atom.dim,))


def random_atom(rng: np.random.Generator, n_levels: int = 1, box: float = 1.0,
                electric: bool = True, magnetic: bool = True) -> AtomSpec:
    """Random detector atom for property and route-equality checks."""
    def cvec():
        return rng.normal(size=3) + 1j * rng.normal(size=3)

    transitions: Sequence[Transition] = tuple(
        Transition(f"e{i}", float(rng.uniform(0.3, 3.0)),
                   cvec() if electric else np.zeros(3), cvec() if magnetic else np.zeros(3))
        for i in range(n_levels))
    return AtomSpec(rng.uniform(-box, box, size=3), 0.0, transitions, float(rng.uniform(0.1, 2.0)))
