"""Single-photon detection by a metastable three-level junction.

The photon mode (truncated to one excitation) exchanges its quantum with
the g-e transition of the junction; from e the junction either tunnels
irreversibly into the latched level f (the click), relaxes back to g, or
the photon is lost first.  Efficiency is the asymptotic population of f,
reached by propagating over geometrically doubled checkpoints so that
slow tails cost only one superoperator squaring per octave.

Junction level order: 0 = ground, 1 = excited, 2 = latched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .device import TWO_PI
from .lindblad import LindbladTerm, Liouvillian, propagator, unvec, vec
from .qcore import DensityMatrix, HilbertSpace, annihilation, embed, number, projector

__all__ = [
    "DetectorParams",
    "DetectionResult",
    "detector_space",
    "build_detector_liouvillian",
    "detection_efficiency",
    "efficiency_sweep",
]

# convergence knobs: efficiency step and residual excitation per checkpoint
CONVERGENCE_TOL = 1e-6
T0_RATE_FACTOR = 10.0
T_MAX_FACTOR = 1.0e3

GROUND, EXCITED, LATCHED = 0, 1, 2


@dataclass(frozen=True)
class DetectorParams:
    """Operating point of the detector.

    All rates are angular (rad/s).  ``detuning`` is photon frequency
    minus junction transition frequency; 0 is the resonant default.
    """

    coupling: float = TWO_PI * 1.0e8
    detuning: float = 0.0
    photon_loss_rate: float = TWO_PI * 1.0e4
    escape_rate: float = TWO_PI * 2.0e7
    intra_well_decay: float = TWO_PI * 1.0e5
    dephasing_rate: float = TWO_PI * 1.0e6

    def __post_init__(self):
        rates = (
            self.coupling,
            self.photon_loss_rate,
            self.escape_rate,
            self.intra_well_decay,
            self.dephasing_rate,
        )
        if any(r < 0 for r in rates):
            raise ValueError("detector rates must be nonnegative")


@dataclass(frozen=True)
class DetectionResult:
    """Outcome of one detection run.

    ``time_series`` holds one row per checkpoint:
    (t, P_ground, P_excited, P_latched, photon population).
    """

    efficiency: float
    time_series: tuple[tuple[float, float, float, float, float], ...]
    converged: bool
    t_final: float

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0 + 1e-9:
            raise ValueError(f"efficiency {self.efficiency} outside [0, 1]")
        object.__setattr__(self, "time_series", tuple(map(tuple, self.time_series)))


def detector_space() -> HilbertSpace:
    return HilbertSpace([("photon", 2), ("junction", 3)])


def build_detector_liouvillian(p: DetectorParams) -> Liouvillian:
    """Exchange Hamiltonian plus the four incoherent channels.

    Jumps: photon loss at kappa; irreversible escape |latched><excited|
    at the escape rate; relaxation |ground><excited| at the intra-well
    rate; pure g/e dephasing via the two level projectors.
    """
    space = detector_space()
    a = embed(annihilation(2, "photon"), space, "photon")
    n_photon = embed(number(2, "photon"), space, "photon")
    lower = embed(projector(GROUND, EXCITED, 3, "junction"), space, "junction")
    escape = embed(projector(LATCHED, EXCITED, 3, "junction"), space, "junction")
    p_ground = embed(projector(GROUND, GROUND, 3, "junction"), space, "junction")
    p_excited = embed(projector(EXCITED, EXCITED, 3, "junction"), space, "junction")

    h = n_photon * p.detuning + (a.dag() @ lower + a @ lower.dag()) * p.coupling

    terms = []
    if p.photon_loss_rate > 0:
        terms.append(LindbladTerm(a, p.photon_loss_rate))
    if p.escape_rate > 0:
        terms.append(LindbladTerm(escape, p.escape_rate))
    if p.intra_well_decay > 0:
        terms.append(LindbladTerm(lower, p.intra_well_decay))
    if p.dephasing_rate > 0:
        terms.append(LindbladTerm(p_ground, p.dephasing_rate))
        terms.append(LindbladTerm(p_excited, p.dephasing_rate))
    return Liouvillian(space, hamiltonian=h, terms=tuple(terms))


def _populations(rho: np.ndarray) -> tuple[float, float, float, float]:
    # flat index = photon * 3 + junction
    diag = np.real(np.diag(rho))
    p_g = float(diag[GROUND] + diag[3 + GROUND])
    p_e = float(diag[EXCITED] + diag[3 + EXCITED])
    p_f = float(diag[LATCHED] + diag[3 + LATCHED])
    photon = float(diag[3] + diag[4] + diag[5])
    return p_g, p_e, p_f, photon


def detection_efficiency(p: DetectorParams) -> DetectionResult:
    """Propagate |1 photon, ground> until the click probability settles.

    Checkpoints sit at t0 * 2^k; the propagator for the current span is
    squared once per checkpoint, so reaching the hard time cap costs a
    logarithmic number of dense multiplications.  Converged means the
    latched population moved less than 1e-6 over the last doubling and
    the surviving excitation (photon plus excited junction) is below
    1e-6; otherwise the best estimate is returned with converged False.
    """
    if p.coupling == 0 or p.escape_rate == 0:
        # photon never couples, or the latched level is unreachable
        return DetectionResult(
            efficiency=0.0,
            time_series=((0.0, 1.0, 0.0, 0.0, 1.0),),
            converged=True,
            t_final=0.0,
        )

    space = detector_space()
    rho0 = space.basis_state([1, GROUND]).to_density_matrix()
    liou = build_detector_liouvillian(p)

    coherent_scales = (
        p.coupling,
        p.photon_loss_rate,
        p.escape_rate,
        p.intra_well_decay,
        p.dephasing_rate,
        abs(p.detuning),
    )
    t0 = 1.0 / (T0_RATE_FACTOR * max(coherent_scales))
    dissipative = [
        r
        for r in (
            p.photon_loss_rate,
            p.escape_rate,
            p.intra_well_decay,
            p.dephasing_rate,
        )
        if r > 0
    ]
    t_max = T_MAX_FACTOR / min(dissipative)

    step = propagator(liou, t0)
    v = step @ vec(rho0.matrix)
    t = t0

    series = [(0.0, 1.0, 0.0, 0.0, 1.0)]
    rho = DensityMatrix(space, unvec(v))
    p_g, p_e, p_f, photon = _populations(rho.matrix)
    series.append((t, p_g, p_e, p_f, photon))

    converged = False
    while True:
        if p_f - series[-2][3] < CONVERGENCE_TOL and photon + p_e < CONVERGENCE_TOL:
            converged = True
            break
        if t >= t_max:
            break
        step = step @ step
        v = step @ v
        t *= 2.0
        rho = DensityMatrix(space, unvec(v))
        p_g, p_e, p_f, photon = _populations(rho.matrix)
        series.append((t, p_g, p_e, p_f, photon))

    return DetectionResult(
        efficiency=min(1.0, max(0.0, p_f)),
        time_series=tuple(series),
        converged=converged,
        t_final=t,
    )


def efficiency_sweep(
    p: DetectorParams, ratios: Sequence[float]
) -> list[tuple[float, DetectionResult]]:
    """Detection runs over a grid of escape-to-loss rate ratios.

    The photon loss rate is held at the configured value and the escape
    rate is set to ratio * kappa for each grid point, in the given order.
    """
    if len(ratios) == 0:
        raise ValueError("ratio grid must be nonempty")
    if any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive")
    if p.photon_loss_rate <= 0:
        raise ValueError("ratio sweep needs a positive photon loss rate")
    out = []
    for ratio in ratios:
        point = DetectorParams(
            coupling=p.coupling,
            detuning=p.detuning,
            photon_loss_rate=p.photon_loss_rate,
            escape_rate=ratio * p.photon_loss_rate,
            intra_well_decay=p.intra_well_decay,
            dephasing_rate=p.dephasing_rate,
        )
        out.append((float(ratio), detection_efficiency(point)))
    return out
