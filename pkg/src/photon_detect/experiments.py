"""
Desk-scale experiments: finite-window line shape, the two-beam
interferometer with electric or magnetic film atoms, the E-B commutator
table, meter completeness and the perturbative scaling study.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from .detector import (AtomSpec, TimeWindow, Transition, detection_operator_dipole, joint_space,
                       two_level_atom)
from .errors import ConfigurationError, UndefinedMetricError
from .fock import make_space
from .measurement import (born_probability, detect_prob, dyson_first_order_prob, energy_meter,
                          exact_propagator, ground_state, level_projector, one_photon_state)
from .modes import Mode, ModeSet, eb_commutator, mode_grid, plane_wave_mode, restrict_sub_cutoff

Y_HAT = np.array([0.0, 1.0, 0.0])


def _unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0:
        raise ConfigurationError(f"{name} must be a finite nonzero 3-vector")
    return v / n


@dataclass
class ScanResult:
    abscissa: np.ndarray
    probability: np.ndarray
    reference: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissa = np.asarray(self.abscissa, dtype=float)
        self.probability = np.asarray(self.probability, dtype=float)
        if self.abscissa.shape != self.probability.shape:
            raise ValueError("abscissa and probability lengths differ")
        if np.any(self.probability < -1e-12):
            raise ValueError("scan contains negative probabilities")


@dataclass(frozen=True)
class ComplementarityMetrics:
    visibility: float
    distinguishability: float

    @property
    def bound(self) -> float:
        return self.visibility ** 2 + self.distinguishability ** 2


# --- line shape ---------------------------------------------------------------

HALF_MAX_SINC_ARG = brentq(lambda x: (math.sin(x) / x) ** 2 - 0.5, 1.0, 2.0)
"""Positive root of sinc^2(x) = 1/2 (about 1.39156)."""


def default_detuning_grid(omega: float, window_length: float, points: int = 4001) -> np.ndarray:
    """Three sinc lobes on the blue side, as far to the red as the gap stays positive."""
    lobe = 2 * np.pi / window_length
    return np.linspace(-min(0.95 * omega, 3 * lobe), 3 * lobe, points)


@dataclass
class LineshapeConfig:
    omega: float
    window_length: float
    detuning_grid: Sequence[float] | None = None
    dipole: Sequence[float] = (1.0, 0.0, 0.0)
    coupling: float = 0.01
    volume: float = 1.0

    def __post_init__(self):
        if not (self.omega > 0 and np.isfinite(self.omega)):
            raise ConfigurationError(f"omega must be > 0, got {self.omega}")
        if not (self.window_length > 0 and np.isfinite(self.window_length)):
            raise ConfigurationError(f"window_length must be > 0, got {self.window_length}")
        if not (self.volume > 0):
            raise ConfigurationError(f"volume must be > 0, got {self.volume}")
        if self.detuning_grid is None:
            self.detuning_grid = default_detuning_grid(self.omega, self.window_length)
        grid = np.asarray(self.detuning_grid, dtype=float)
        if grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise ConfigurationError("detuning_grid must be nonempty and strictly increasing")
        if grid[0] <= -self.omega:
            raise ConfigurationError("detuning_grid reaches a non-positive transition energy")
        self.detuning_grid = grid
        self.dipole = _unit(self.dipole, "dipole")

    @property
    def mode(self) -> Mode:
        return plane_wave_mode([0.0, 0.0, self.omega], 1)

    def resonant_coupling(self) -> float:
        """|c| with c the E+.d coefficient of the probe mode at the atom."""
        return abs(self.coupling * self.omega * np.dot(self.mode.eps, self.dipole)) \
            / math.sqrt(2 * self.omega * self.volume)


def run_lineshape(cfg: LineshapeConfig) -> ScanResult:
    """Detection probability of one photon in a single mode versus atomic detuning."""
    ms = ModeSet((cfg.mode,), cfg.volume)
    space = make_space([1])
    rho = one_photon_state(space, [1.0])
    window = TimeWindow.centered(cfg.window_length)
    probs = np.empty(len(cfg.detuning_grid))
    for i, delta in enumerate(cfg.detuning_grid):
        atom = two_level_atom(gap=cfg.omega + delta, dipole_e=cfg.dipole, coupling=cfg.coupling)
        d = detection_operator_dipole(ms, space, atom, "e", window, rwa=True)
        probs[i] = detect_prob(d, rho, clip=False)
    T = cfg.window_length
    reference = cfg.resonant_coupling() ** 2 * T ** 2 * np.sinc(cfg.detuning_grid * T / (2 * np.pi)) ** 2
    if probs.max() > 1.0:
        raise ConfigurationError(f"first-order peak probability {probs.max():.3g} exceeds 1; reduce coupling")
    return ScanResult(cfg.detuning_grid, probs, reference,
                      {"experiment": "lineshape", "omega": cfg.omega, "window_length": T,
                       "coupling": cfg.coupling, "volume": cfg.volume, "dipole": cfg.dipole.tolist()})


def fwhm(scan: ScanResult) -> float:
    """Full width at half maximum of the central peak, by linear interpolation."""
    x, p = scan.abscissa, scan.probability
    i0 = int(np.argmax(p))
    half = 0.5 * p[i0]

    def crossing(step):
        i = i0
        while 0 <= i + step < len(p) and p[i + step] > half:
            i += step
        j = i + step
        if not 0 <= j < len(p):
            raise UndefinedMetricError("half maximum not reached inside the scan")
        return x[i] + (half - p[i]) * (x[j] - x[i]) / (p[j] - p[i])

    return float(crossing(1) - crossing(-1))


def first_zero_above_peak(scan: ScanResult) -> float:
    """Abscissa of the first local minimum to the right of the maximum."""
    p = scan.probability
    i = int(np.argmax(p))
    while i + 1 < len(p) and p[i + 1] <= p[i]:
        i += 1
    if i + 1 >= len(p):
        raise UndefinedMetricError("no minimum to the right of the peak inside the scan")
    return float(scan.abscissa[i])


# --- interferometer -------------------------------------------------------------

@dataclass
class MziConfig:
    """Two beams k_hat(+/-) = cos(theta) z +/- sin(theta) x, both polarized along y, meeting a film at z = film_z."""

    wavenumber: float = 1.0
    half_angle: float = math.pi / 4
    relative_phase: float = 0.0
    film_z: float = 0.0
    detector_kind: Literal["electric", "magnetic"] = "electric"
    orientation: Sequence[float] | None = None
    window_length: float = 20.0
    coupling: float = 0.01
    volume: float = 1.0
    scan_x: Sequence[float] | None = None

    def __post_init__(self):
        if not (self.wavenumber > 0 and np.isfinite(self.wavenumber)):
            raise ConfigurationError(f"wavenumber must be > 0, got {self.wavenumber}")
        if not 0 < self.half_angle < math.pi / 2:
            raise ConfigurationError(f"half_angle must lie in (0, pi/2), got {self.half_angle}")
        if self.detector_kind not in ("electric", "magnetic"):
            raise ConfigurationError(f"detector_kind must be electric or magnetic, got {self.detector_kind!r}")
        if not (self.window_length > 0):
            raise ConfigurationError(f"window_length must be > 0, got {self.window_length}")
        if not (self.volume > 0):
            raise ConfigurationError(f"volume must be > 0, got {self.volume}")
        if not (self.coupling >= 0):
            raise ConfigurationError(f"coupling must be >= 0, got {self.coupling}")
        if self.orientation is None:
            self.orientation = Y_HAT if self.detector_kind == "electric" else self.path_b_direction(1)
        self.orientation = _unit(self.orientation, "orientation")
        if self.scan_x is None:
            self.scan_x = self.fringe_period * np.arange(256) / 64.0
        x = np.asarray(self.scan_x, dtype=float)
        if x.size < 2 or np.any(np.diff(x) <= 0):
            raise ConfigurationError("scan_x must be strictly increasing with at least two points")
        periods = (x[-1] - x[0]) / self.fringe_period
        if periods < 3 - 1e-9:
            raise ConfigurationError(
                f"scan covers {periods:.3g} fringe periods (period {self.fringe_period:.4g}); at least 3 required")
        if (x.size - 1) / periods < 16 - 1e-9:
            raise ConfigurationError("scan needs at least 16 points per fringe period")
        self.scan_x = x

    @property
    def fringe_period(self) -> float:
        return math.pi / (self.wavenumber * math.sin(self.half_angle))

    def wavevector(self, path: int) -> np.ndarray:
        sign = 1.0 if path == 1 else -1.0
        return self.wavenumber * np.array([sign * math.sin(self.half_angle), 0.0, math.cos(self.half_angle)])

    def path_b_direction(self, path: int) -> np.ndarray:
        """Unit vector of the magnetic field of a y-polarized beam on ``path``."""
        b = np.cross(self.wavevector(path), Y_HAT)
        return b / np.linalg.norm(b)

    def mode_set(self) -> ModeSet:
        return ModeSet(tuple(Mode(self.wavevector(p), 1, Y_HAT.astype(complex), self.wavenumber) for p in (1, 2)),
                       self.volume)

    def atom_at(self, x: float) -> AtomSpec:
        d = self.orientation if self.detector_kind == "electric" else np.zeros(3)
        m = self.orientation if self.detector_kind == "magnetic" else np.zeros(3)
        return AtomSpec((x, 0.0, self.film_z), 0.0, (Transition("e", self.wavenumber, d, m),), self.coupling)


def _film_response(cfg: MziConfig, amplitudes: Sequence[complex]) -> np.ndarray:
    ms = cfg.mode_set()
    space = make_space([1, 1])
    rho = one_photon_state(space, amplitudes)
    window = TimeWindow.centered(cfg.window_length)
    out = np.empty(len(cfg.scan_x))
    for i, x in enumerate(cfg.scan_x):
        d = detection_operator_dipole(ms, space, cfg.atom_at(x), "e", window, rwa=True)
        out[i] = detect_prob(d, rho)
    return out


def run_mzi(cfg: MziConfig) -> tuple[ScanResult, ComplementarityMetrics]:
    """Film scan for the superposed photon, plus visibility and which-path distinguishability."""
    amps = np.array([1.0, np.exp(1j * cfg.relative_phase)]) / math.sqrt(2)
    scan = ScanResult(cfg.scan_x, _film_response(cfg, amps), None,
                      {"experiment": "mzi", "detector_kind": cfg.detector_kind,
                       "orientation": cfg.orientation.tolist(), "half_angle": cfg.half_angle,
                       "wavenumber": cfg.wavenumber, "relative_phase": cfg.relative_phase})
    return scan, ComplementarityMetrics(visibility(scan), distinguishability(cfg))


def visibility(scan: ScanResult) -> float:
    p = scan.probability
    if p.size < 2:
        raise ValueError("visibility needs at least two scan points")
    hi, lo = float(p.max()), float(p.min())
    if hi <= 1e-15:
        return 0.0
    return (hi - lo) / (hi + lo)


def distinguishability(cfg: MziConfig) -> float:
    """Path contrast |p1 - p2| / (p1 + p2) of the scan-averaged single-path responses."""
    p1 = _film_response(cfg, [1.0, 0.0]).mean()
    p2 = _film_response(cfg, [0.0, 1.0]).mean()
    if p1 < 1e-15 and p2 < 1e-15:
        raise UndefinedMetricError("detector does not respond to either path")
    return float(abs(p1 - p2) / (p1 + p2))


def measured_fringe_period(scan: ScanResult) -> float:
    """Mean spacing of interior local minima, each refined by a parabola through its neighbours."""
    x, p = scan.abscissa, scan.probability
    mins = []
    for i in range(1, len(p) - 1):
        if p[i] <= p[i - 1] and p[i] < p[i + 1]:
            denom = p[i - 1] - 2 * p[i] + p[i + 1]
            shift = 0.5 * (p[i - 1] - p[i + 1]) / denom if denom > 0 else 0.0
            mins.append(x[i] + shift * (x[i + 1] - x[i]))
    if len(mins) < 2:
        raise UndefinedMetricError("fewer than two fringe minima in the scan")
    return float(np.mean(np.diff(mins)))


# --- commutator -----------------------------------------------------------------

def symmetric_grid(k0: float = 1.0, axis: int = 0, volume: float = 1.0) -> ModeSet:
    """+/- k0 along one axis, both polarizations: four modes closed under k -> -k."""
    k = np.zeros(3)
    k[axis] = k0
    return mode_grid([k, -k], volume)


@dataclass(frozen=True)
class CommutatorRow:
    j: int
    k: int
    x: tuple[float, float, float]
    y: tuple[float, float, float]
    t: float
    numeric: complex
    analytic: complex
    difference: float


def run_commutator_report(ms: ModeSet, points: Sequence[tuple], times: Sequence[float] = (0.0,),
                          cutoff: int = 1) -> list[CommutatorRow]:
    """Tabulate [E_j(x,t), B_k(y,t)] for each (j, k, x, y) and time.

    ``numeric`` is the vacuum expectation of the matrix commutator;
    ``difference`` is max |C - analytic * 1| over the block where every
    mode is below its cutoff.
    """
    space = make_space([cutoff] * len(ms))
    rows = []
    for (j, k, x, y) in points:
        for t in times:
            num, ana = eb_commutator(ms, space, j, k, x, y, t)
            block = restrict_sub_cutoff(num)
            diff = float(np.max(np.abs(block - ana * np.eye(block.shape[0]))))
            rows.append(CommutatorRow(j, k, tuple(map(float, x)), tuple(map(float, y)), float(t),
                                      complex(num.matrix[0, 0]), ana, diff))
    return rows


# --- indirect measurement checks -------------------------------------------------

@dataclass
class IndirectConfig:
    """Photon modes and a detector atom for the exact-channel experiments."""

    wavevectors: Sequence[Sequence[float]] = ((0.0, 0.0, 1.0), (0.0, 0.0, -1.0))
    polarization: int = 1
    volume: float = 1.0
    gap: float = 1.0
    dipole_e: Sequence[complex] = (1.0, 0.0, 0.0)
    dipole_m: Sequence[complex] = (0.0, 0.0, 0.0)
    coupling: float = 0.05
    window_length: float = 10.0
    steps: int = 2000
    photon_amplitudes: Sequence[complex] | None = None

    def __post_init__(self):
        if not self.volume > 0:
            raise ConfigurationError(f"volume must be > 0, got {self.volume}")
        if not self.gap > 0:
            raise ConfigurationError(f"gap must be > 0, got {self.gap}")
        if not self.window_length > 0:
            raise ConfigurationError(f"window_length must be > 0, got {self.window_length}")
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")
        if self.polarization not in (1, 2):
            raise ConfigurationError("polarization must be 1 or 2")
        n = len(self.wavevectors)
        if self.photon_amplitudes is None:
            self.photon_amplitudes = [1.0 / math.sqrt(n)] * n
        if len(self.photon_amplitudes) != n:
            raise ConfigurationError("photon_amplitudes needs one entry per wavevector")

    def mode_set(self) -> ModeSet:
        return mode_grid(self.wavevectors, self.volume, polarizations=(self.polarization,))

    def atom(self, coupling: float | None = None) -> AtomSpec:
        g = self.coupling if coupling is None else coupling
        return two_level_atom(gap=self.gap, dipole_e=self.dipole_e, dipole_m=self.dipole_m, coupling=g)

    def window(self) -> TimeWindow:
        return TimeWindow(0.0, self.window_length)


def run_povm_check(cfg: IndirectConfig) -> tuple[list[float], float]:
    """Born probabilities of every energy-meter outcome under the exact propagator, and their sum."""
    ms = cfg.mode_set()
    atom = cfg.atom()
    photon = make_space([1] * len(ms))
    joint = joint_space(photon, atom)
    u = exact_propagator(ms, joint, atom, cfg.window(), cfg.steps)
    rho = one_photon_state(photon, cfg.photon_amplitudes)
    probs = [born_probability(p, u, rho, ground_state(atom)) for p in energy_meter(atom).projectors]
    return probs, float(sum(probs))


@dataclass(frozen=True)
class ScalingPoint:
    coupling: float
    p_first_order: float
    p_exact: float

    @property
    def abs_error(self) -> float:
        return abs(self.p_exact - self.p_first_order)

    @property
    def rel_error(self) -> float:
        return self.abs_error / self.p_first_order


def tune_coupling(cfg: IndirectConfig, target: float) -> float:
    """Coupling at which the first-order excitation probability equals ``target`` (it scales as g^2)."""
    p_unit = _first_order(cfg, 1.0)
    if p_unit <= 0:
        raise UndefinedMetricError("first-order probability vanishes for this configuration")
    return math.sqrt(target / p_unit)


def _first_order(cfg: IndirectConfig, g: float) -> float:
    ms = cfg.mode_set()
    atom = cfg.atom(g)
    photon = make_space([1] * len(ms))
    return dyson_first_order_prob(ms, joint_space(photon, atom), atom, cfg.window(), level_projector(atom, 1),
                                  one_photon_state(photon, cfg.photon_amplitudes), ground_state(atom))


def scaling_point(cfg: IndirectConfig, g: float) -> ScalingPoint:
    ms = cfg.mode_set()
    atom = cfg.atom(g)
    photon = make_space([1] * len(ms))
    joint = joint_space(photon, atom)
    u = exact_propagator(ms, joint, atom, cfg.window(), cfg.steps)
    rho = one_photon_state(photon, cfg.photon_amplitudes)
    exact = born_probability(level_projector(atom, 1), u, rho, ground_state(atom))
    return ScalingPoint(g, _first_order(cfg, g), exact)


def run_perturbation_scaling(cfg: IndirectConfig, target: float = 1e-4, halvings: int = 1) -> list[ScalingPoint]:
    """Exact versus first-order excitation probability at g, g/2, ... with p_first(g) tuned to ``target``."""
    g = tune_coupling(cfg, target)
    return [scaling_point(cfg, g / 2 ** n) for n in range(halvings + 1)]


def config_dict(cfg) -> dict:
    """Plain-data echo of an experiment config for provenance headers."""
    out = {}
    for key, value in asdict(cfg).items():
        if isinstance(value, np.ndarray):
            value = value.tolist()
        out[key] = value
    return out
