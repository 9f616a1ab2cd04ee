"""
Box-quantized plane-wave modes and the A, E, B field operators built on them.

Units are natural (hbar = c = eps0 = 1).  For a mode mu with wavevector k,
polarization eps and frequency omega = |k| in a box of volume V, the
coefficient of the annihilator a_mu in the positive-frequency parts is

    A+ : eps exp(i(k.x - omega t)) / sqrt(2 omega V)
    E+ : i omega * (A+ coefficient)          (E = -dA/dt)
    B+ : i k x (A+ coefficient)              (B = curl A)

and the negative-frequency coefficient (of a_mu^dagger) is the complex
conjugate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .fock import FockSpace, QOperator, annihilation_op

GEOMETRY_TOL = 1e-14


class Field(str, enum.Enum):
    A = "A"
    E = "E"
    B = "B"


class Part(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    FULL = "full"


@dataclass(frozen=True)
class FieldSpec:
    field: Field
    part: Part

    def __post_init__(self):
        object.__setattr__(self, "field", Field(self.field))
        object.__setattr__(self, "part", Part(self.part))


def _vec3(v, dtype=float) -> np.ndarray:
    arr = np.asarray(v, dtype=dtype).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("3-vector has non-finite entries")
    return arr


def polarization_basis(k) -> tuple[np.ndarray, np.ndarray]:
    """Transverse orthonormal pair for wavevector ``k``.

    eps1 is z x k_hat normalized (x_hat when k is along z), eps2 = k_hat x eps1.
    """
    k = _vec3(k)
    knorm = np.linalg.norm(k)
    if knorm == 0:
        raise ValueError("polarization basis undefined for zero wavevector")
    khat = k / knorm
    e1 = np.cross([0.0, 0.0, 1.0], khat)
    n1 = np.linalg.norm(e1)
    # z x k_hat has no cancellation, so only an exactly axial k needs the fallback
    if n1 == 0:
        e1 = np.array([1.0, 0.0, 0.0])
    else:
        e1 = e1 / n1
    e2 = np.cross(khat, e1)
    return e1, e2 / np.linalg.norm(e2)


@dataclass(frozen=True)
class Mode:
    """Plane-wave mode: wavevector, polarization index, polarization vector, frequency."""

    k: np.ndarray
    s: int
    eps: np.ndarray
    omega: float

    def __post_init__(self):
        k = _vec3(self.k)
        eps = _vec3(self.eps, complex)
        kn = np.linalg.norm(k)
        if kn == 0:
            raise ValueError("mode wavevector must be nonzero")
        if self.s not in (1, 2):
            raise ValueError(f"polarization index must be 1 or 2, got {self.s}")
        scale = max(1.0, kn)
        if abs(np.dot(k, eps)) > GEOMETRY_TOL * scale:
            raise ValueError("polarization is not transverse to k")
        if abs(np.linalg.norm(eps) - 1.0) > GEOMETRY_TOL:
            raise ValueError("polarization vector is not unit length")
        if abs(float(self.omega) - kn) > GEOMETRY_TOL * scale:
            raise ValueError(f"omega {self.omega} != |k| {kn}")
        k.flags.writeable = False
        eps.flags.writeable = False
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "omega", float(self.omega))


def plane_wave_mode(k, s: int, eps=None) -> Mode:
    """Mode with omega = |k|; eps defaults to the conventional basis vector for ``s``."""
    k = _vec3(k)
    if eps is None:
        eps = polarization_basis(k)[s - 1]
    return Mode(k, s, np.asarray(eps, dtype=complex), float(np.linalg.norm(k)))


@dataclass(frozen=True)
class ModeSet:
    modes: tuple[Mode, ...]
    volume: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ConfigurationError("mode set is empty")
        if not (np.isfinite(self.volume) and self.volume > 0):
            raise ConfigurationError(f"quantization volume must be > 0, got {self.volume}")
        by_k: dict[tuple, list[Mode]] = {}
        for m in self.modes:
            by_k.setdefault(tuple(m.k.tolist()), []).append(m)
        for key, group in by_k.items():
            if len({m.s for m in group}) != len(group):
                raise ConfigurationError(f"duplicate (k, s) for k = {key}")
            if len(group) == 2:
                overlap = abs(np.vdot(group[0].eps, group[1].eps))
                if overlap > GEOMETRY_TOL:
                    raise ConfigurationError(f"polarizations for k = {key} are not orthogonal")

    def __len__(self):
        return len(self.modes)

    @property
    def wavevectors(self) -> np.ndarray:
        return np.array([m.k for m in self.modes])

    @property
    def polarizations(self) -> np.ndarray:
        return np.array([m.eps for m in self.modes])

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])


def mode_grid(wavevectors: Sequence, volume: float = 1.0, polarizations: Sequence[int] = (1, 2)) -> ModeSet:
    """Both (or selected) polarizations for each wavevector, in wavevector-major order."""
    return ModeSet(tuple(plane_wave_mode(k, s) for k in wavevectors for s in polarizations), volume)


def _plus_coefficients(ks: np.ndarray, eps: np.ndarray, omegas: np.ndarray, volume: float,
                       which: Field, x, t: float) -> np.ndarray:
    phase = np.exp(1j * (ks @ _vec3(x) - omegas * t)) / np.sqrt(2.0 * omegas * volume)
    a_plus = eps * phase[:, None]
    if which is Field.A:
        return a_plus
    if which is Field.E:
        return 1j * omegas[:, None] * a_plus
    return 1j * np.cross(ks, a_plus)


def field_coefficient(mode: Mode, volume: float, spec: FieldSpec, x, t: float) -> np.ndarray:
    """Coefficient of a_mu (plus) or a_mu^dagger (minus) in the chosen field at (x, t)."""
    spec = FieldSpec(spec.field, spec.part)
    if spec.part is Part.FULL:
        raise ValueError("the full field has no single ladder coefficient; ask for plus or minus")
    c = _plus_coefficients(mode.k[None, :], mode.eps[None, :], np.array([mode.omega]), volume,
                           spec.field, x, t)[0]
    return c if spec.part is Part.PLUS else c.conj()


def field_coefficients(ms: ModeSet, which: Field, x, t: float) -> np.ndarray:
    """Positive-frequency coefficients of every mode, shape (n_modes, 3)."""
    return _plus_coefficients(ms.wavevectors, ms.polarizations, ms.frequencies, ms.volume,
                              Field(which), x, t)


def _check_space(ms: ModeSet, space: FockSpace):
    if space.n_modes != len(ms):
        raise ConfigurationError(f"space has {space.n_modes} photon modes but mode set has {len(ms)}")


def field_operator(ms: ModeSet, space: FockSpace, spec: FieldSpec, component: int, x, t: float) -> QOperator:
    """Cartesian ``component`` of the field operator at (x, t); identity on any atom factors."""
    _check_space(ms, space)
    spec = FieldSpec(spec.field, spec.part)
    if component not in (0, 1, 2):
        raise IndexError(f"component must be 0, 1 or 2, got {component}")
    coeffs = field_coefficients(ms, spec.field, x, t)[:, component]
    plus = np.zeros((space.dim, space.dim), dtype=complex)
    for mu, c in enumerate(coeffs):
        plus += c * annihilation_op(space, mu).matrix
    if spec.part is Part.PLUS:
        return QOperator(space, plus)
    if spec.part is Part.MINUS:
        return QOperator(space, plus.conj().T)
    return QOperator(space, plus + plus.conj().T)


def eb_commutator(ms: ModeSet, space: FockSpace, j: int, k: int, x, y, t: float) -> tuple[QOperator, complex]:
    """Equal-time [E_j(x,t), B_k(y,t)] as a matrix and as the c-number mode sum.

    The c-number is sum_mu (e_mu,j(x) b*_mu,k(y) - e*_mu,j(x) b_mu,k(y)); the matrix
    equals it times the identity only where no mode sits at its cutoff.
    """
    e_full = field_operator(ms, space, FieldSpec(Field.E, Part.FULL), j, x, t)
    b_full = field_operator(ms, space, FieldSpec(Field.B, Part.FULL), k, y, t)
    numeric = e_full @ b_full - b_full @ e_full
    e = field_coefficients(ms, Field.E, x, t)[:, j]
    b = field_coefficients(ms, Field.B, y, t)[:, k]
    analytic = complex(np.sum(e * b.conj() - e.conj() * b))
    return numeric, analytic


def restrict_sub_cutoff(op: QOperator) -> np.ndarray:
    """Block of ``op`` on basis vectors with every mode below its cutoff."""
    mask = op.space.sub_cutoff_mask()
    return op.matrix[np.ix_(mask, mask)]
