"""
Truncated multimode Fock spaces and dense operators on them.

Basis ordering is mode-major: mode 0 is the slowest-varying index, the
last photon mode the fastest, and any atom (apparatus) factors are
appended after all photon modes.  A basis vector is therefore labelled by
``(n_0, ..., n_{M-1}, a_0, ..., a_{K-1})`` and its flat index is the
row-major (C order) ravel of that tuple over the factor dimensions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ShapeError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10


@dataclass(frozen=True)
class FockSpace:
    """Product of truncated bosonic modes and finite-level atom factors."""

    cutoffs: tuple[int, ...]
    atom_dims: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))
        object.__setattr__(self, "atom_dims", tuple(int(d) for d in self.atom_dims))
        if not self.cutoffs and not self.atom_dims:
            raise ConfigurationError("space needs at least one mode or atom factor")
        if any(c < 1 for c in self.cutoffs):
            raise ConfigurationError(f"every photon cutoff must be >= 1, got {self.cutoffs}")
        if any(d < 1 for d in self.atom_dims):
            raise ConfigurationError(f"every atom dimension must be >= 1, got {self.atom_dims}")

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def n_atoms(self) -> int:
        return len(self.atom_dims)

    @property
    def dims(self) -> tuple[int, ...]:
        """Dimensions of every tensor factor, photon modes first."""
        return tuple(c + 1 for c in self.cutoffs) + self.atom_dims

    @property
    def photon_dim(self) -> int:
        return int(np.prod([c + 1 for c in self.cutoffs], dtype=int))

    @property
    def apparatus_dim(self) -> int:
        return int(np.prod(self.atom_dims, dtype=int))

    @property
    def dim(self) -> int:
        return self.photon_dim * self.apparatus_dim

    def photon_space(self) -> FockSpace:
        return FockSpace(self.cutoffs, ())

    def apparatus_space(self) -> FockSpace:
        if not self.atom_dims:
            raise ConfigurationError("space has no apparatus factor")
        return FockSpace((), self.atom_dims)

    def basis(self) -> list[tuple[int, ...]]:
        """All basis labels in index order."""
        return list(itertools.product(*(range(d) for d in self.dims)))

    def index(self, label: Sequence[int]) -> int:
        if len(label) != len(self.dims):
            raise ShapeError(f"label {tuple(label)} does not match factor count {len(self.dims)}")
        return int(np.ravel_multi_index(tuple(label), self.dims))

    def total_photons(self) -> np.ndarray:
        """Total photon number of every basis vector, in index order."""
        grids = np.indices(self.dims).reshape(len(self.dims), -1)
        return grids[: self.n_modes].sum(axis=0)

    def sub_cutoff_mask(self) -> np.ndarray:
        """Basis vectors whose every mode occupation is strictly below its cutoff."""
        grids = np.indices(self.dims).reshape(len(self.dims), -1)
        mask = np.ones(self.dim, dtype=bool)
        for m, c in enumerate(self.cutoffs):
            mask &= grids[m] < c
        return mask


@dataclass(frozen=True)
class QOperator:
    """Dense complex matrix tied to the space it acts on."""

    space: FockSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ShapeError(f"matrix shape {mat.shape} does not fit space of dimension {self.space.dim}")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    def dag(self) -> QOperator:
        return QOperator(self.space, self.matrix.conj().T)

    def _check(self, other: QOperator):
        if other.space != self.space:
            raise ShapeError("operators act on different spaces")

    def __matmul__(self, other: QOperator) -> QOperator:
        self._check(other)
        return QOperator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: QOperator) -> QOperator:
        self._check(other)
        return QOperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: QOperator) -> QOperator:
        self._check(other)
        return QOperator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> QOperator:
        return QOperator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> QOperator:
        return QOperator(self.space, -self.matrix)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(vector, dtype=complex)


@dataclass(frozen=True)
class QState:
    """Density matrix, validated on construction."""

    space: FockSpace
    density: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.density, dtype=complex)
        if rho.shape != (self.space.dim, self.space.dim):
            raise ShapeError(f"density shape {rho.shape} does not fit space of dimension {self.space.dim}")
        herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
        if herm > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.2e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} != 1")
        lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
        if lowest < POSITIVITY_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lowest:.2e}")
        rho.flags.writeable = False
        object.__setattr__(self, "density", rho)

    @classmethod
    def pure(cls, space: FockSpace, vector: np.ndarray) -> QState:
        """Projector onto ``vector`` (normalized here)."""
        psi = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValueError("cannot build a state from the zero vector")
        psi = psi / norm
        return cls(space, np.outer(psi, psi.conj()))

    @classmethod
    def basis_state(cls, space: FockSpace, label: Sequence[int]) -> QState:
        psi = np.zeros(space.dim, dtype=complex)
        psi[space.index(label)] = 1.0
        return cls.pure(space, psi)

    def as_operator(self) -> QOperator:
        return QOperator(self.space, self.density)

    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.density, self.density)))


def make_space(cutoffs: Sequence[int], atom_dims: Sequence[int] = ()) -> FockSpace:
    """Build a photon (optionally photon x atom) space; at least one mode is required."""
    if len(cutoffs) == 0:
        raise ConfigurationError("cutoff list is empty; at least one photon mode is required")
    return FockSpace(tuple(cutoffs), tuple(atom_dims))


def basis_vector(space: FockSpace, label: Sequence[int]) -> np.ndarray:
    psi = np.zeros(space.dim, dtype=complex)
    psi[space.index(label)] = 1.0
    return psi


def vacuum(space: FockSpace) -> np.ndarray:
    """All modes empty and every atom in its level 0."""
    return basis_vector(space, (0,) * len(space.dims))


def identity(space: FockSpace) -> QOperator:
    return QOperator(space, np.eye(space.dim, dtype=complex))


def ladder(cutoff: int) -> np.ndarray:
    """Single-mode annihilation matrix on {|0>, ..., |cutoff>}."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)


def _kron_factors(space: FockSpace, position: int, local: np.ndarray) -> np.ndarray:
    factors = [np.eye(d, dtype=complex) for d in space.dims]
    factors[position] = local
    return reduce(np.kron, factors)


def annihilation_op(space: FockSpace, mode: int) -> QOperator:
    if not 0 <= mode < space.n_modes:
        raise IndexError(f"mode {mode} out of range for {space.n_modes} modes")
    return QOperator(space, _kron_factors(space, mode, ladder(space.cutoffs[mode])))


def creation_op(space: FockSpace, mode: int) -> QOperator:
    return annihilation_op(space, mode).dag()


def embed_atom_op(space: FockSpace, atom: int, local: np.ndarray) -> QOperator:
    """Place ``local`` on atom factor ``atom``; identity on every other factor."""
    if not 0 <= atom < space.n_atoms:
        raise IndexError(f"atom {atom} out of range for {space.n_atoms} atoms")
    local = np.asarray(local, dtype=complex)
    d = space.atom_dims[atom]
    if local.shape != (d, d):
        raise ShapeError(f"local operator shape {local.shape} does not match atom dimension {d}")
    return QOperator(space, _kron_factors(space, space.n_modes + atom, local))


def tensor(photon_part: np.ndarray | QOperator | QState, apparatus_part: np.ndarray | QOperator | QState,
           joint: FockSpace) -> QOperator:
    """Kronecker product of a photon-space matrix and an apparatus-space matrix on ``joint``."""
    x = _as_matrix(photon_part)
    s = _as_matrix(apparatus_part)
    if x.shape != (joint.photon_dim,) * 2 or s.shape != (joint.apparatus_dim,) * 2:
        raise ShapeError("factor shapes do not match the joint space")
    return QOperator(joint, np.kron(x, s))


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, QOperator):
        return obj.matrix
    if isinstance(obj, QState):
        return obj.density
    return np.asarray(obj, dtype=complex)


def partial_trace_apparatus(op: QOperator) -> QOperator:
    """Trace out every atom factor, leaving an operator on the photon modes."""
    space = op.space
    if not space.atom_dims:
        raise ConfigurationError("operator has no apparatus factor to trace out")
    dh, dk = space.photon_dim, space.apparatus_dim
    reduced = np.einsum("ikjk->ij", op.matrix.reshape(dh, dk, dh, dk))
    return QOperator(space.photon_space(), reduced)


def trace_product(a: QOperator, b: QOperator) -> complex:
    """Tr(a b) as an elementwise contraction."""
    if a.space != b.space:
        raise ShapeError("trace_product operands act on different spaces")
    return complex(np.einsum("ij,ji->", a.matrix, b.matrix))


def commutator(a: QOperator, b: QOperator) -> QOperator:
    return a @ b - b @ a
