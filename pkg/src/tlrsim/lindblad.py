"""Master equation engine for small dense systems.

Two independent integration paths are kept deliberately separate so they
can cross-check each other: a vectorized superoperator exponential
(column-stacking convention, vec(A rho B) = (B^T kron A) vec(rho)) and a
classic fixed-step RK4 that evaluates the dissipator directly with matrix
products, never touching the superoperator.  Jump rates are canonical:
a term (op, rate) contributes rate * (O rho O+ - {O+O, rho}/2).

Quasi-static noise is handled by Monte Carlo over per-sample RNG
substreams keyed by (seed, point_index, sample_index) so results do not
depend on execution order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import expm

from .qcore import DensityMatrix, HilbertSpace, Operator

__all__ = [
    "IntegrationError",
    "MonteCarloError",
    "LindbladTerm",
    "Liouvillian",
    "build_liouvillian",
    "vec",
    "unvec",
    "propagator",
    "propagate_expm",
    "propagate_rk4",
    "Evolve",
    "Apply",
    "propagate_schedule",
    "trace_distance",
    "substream_rng",
    "QuasiStaticNoise",
    "ObservableStat",
    "MonteCarloResult",
    "monte_carlo_quasistatic",
    "monte_carlo_scalar",
    "quasistatic_sigma",
]

TRACE_DRIFT_TOL = 1e-9
MAX_HALVINGS = 20
MAX_STEPS = 2_000_000

# RK4 target for dt * (spectral scale); keeps the global error comfortably
# below the 1e-6 cross-check budget for the times this package integrates.
_STEP_FRACTION = 0.02


class IntegrationError(RuntimeError):
    """Integrator could not reach the requested accuracy."""


class MonteCarloError(RuntimeError):
    """A Monte Carlo sample failed; message carries index and drawn value."""


@dataclass(frozen=True)
class LindbladTerm:
    """One jump operator with its canonical rate."""

    operator: Operator
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"jump rate must be nonnegative, got {self.rate}")


@dataclass(frozen=True)
class Liouvillian:
    """Hamiltonian plus jump terms on one Hilbert space."""

    space: HilbertSpace
    hamiltonian: Operator | None = None
    terms: tuple[LindbladTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.hamiltonian is not None:
            if self.hamiltonian.space != self.space:
                raise ValueError("hamiltonian lives on a different space")
            if not self.hamiltonian.is_hermitian():
                raise ValueError("hamiltonian must be Hermitian")
        for term in self.terms:
            if term.operator.space != self.space:
                raise ValueError("jump operator lives on a different space")

    def matrix(self) -> np.ndarray:
        """Dense superoperator in the column-stacking convention."""
        d = self.space.dim
        eye = np.eye(d)
        sup = np.zeros((d * d, d * d), dtype=complex)
        if self.hamiltonian is not None:
            h = self.hamiltonian.matrix
            sup += -1j * (np.kron(eye, h) - np.kron(h.T, eye))
        for term in self.terms:
            l = term.operator.matrix
            ldl = l.conj().T @ l
            sup += term.rate * (
                np.kron(l.conj(), l)
                - 0.5 * np.kron(eye, ldl)
                - 0.5 * np.kron(ldl.T, eye)
            )
        return sup

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Right-hand side d(rho)/dt evaluated with plain matrix products."""
        out = np.zeros_like(rho, dtype=complex)
        if self.hamiltonian is not None:
            h = self.hamiltonian.matrix
            out += -1j * (h @ rho - rho @ h)
        for term in self.terms:
            l = term.operator.matrix
            ldl = l.conj().T @ l
            out += term.rate * (l @ rho @ l.conj().T - 0.5 * (ldl @ rho + rho @ ldl))
        return out

    def spectral_scale(self) -> float:
        """Rough magnitude of the fastest rate, for step-size heuristics."""
        scale = 0.0
        if self.hamiltonian is not None:
            scale += float(np.linalg.norm(self.hamiltonian.matrix, 2))
        for term in self.terms:
            scale += term.rate * float(np.linalg.norm(term.operator.matrix, 2)) ** 2
        return scale


def build_liouvillian(
    hamiltonian: Operator, terms: Sequence[LindbladTerm] = ()
) -> Liouvillian:
    """Generator from a Hermitian Hamiltonian plus jump terms on its space."""
    return Liouvillian(hamiltonian.space, hamiltonian=hamiltonian, terms=tuple(terms))


def vec(matrix: np.ndarray) -> np.ndarray:
    """Stack columns: vec(M)[i + j*d] = M[i, j]."""
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return np.asarray(v).reshape((d, d), order="F")


def propagator(liouvillian: Liouvillian, duration: float) -> np.ndarray:
    """Superoperator exp(L t) acting on column-stacked density matrices."""
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    return expm(liouvillian.matrix() * duration)


def propagate_expm(
    liouvillian: Liouvillian, rho0: DensityMatrix, duration: float
) -> DensityMatrix:
    """Evolve by the matrix exponential of the superoperator.

    The result is re-Hermitized as (rho + rho+)/2 before state validation;
    the pre-Hermitization asymmetry is pure vectorization roundoff and is
    bounded separately by the validation suite.
    """
    if rho0.space != liouvillian.space:
        raise ValueError("state lives on a different space")
    if duration == 0:
        return rho0
    final = unvec(propagator(liouvillian, duration) @ vec(rho0.matrix))
    final = 0.5 * (final + final.conj().T)
    return DensityMatrix(liouvillian.space, final)


def propagate_rk4(
    liouvillian: Liouvillian,
    rho0: DensityMatrix,
    duration: float,
    *,
    initial_steps: int | None = None,
    trace_tol: float = TRACE_DRIFT_TOL,
    max_halvings: int = MAX_HALVINGS,
) -> DensityMatrix:
    """Fixed-step RK4 on the matrix-valued master equation.

    The generator preserves trace exactly in exact arithmetic, so any
    trace drift flags numerical trouble; the step is halved until the
    drift stays below ``trace_tol`` or ``max_halvings`` is exhausted.
    """
    if rho0.space != liouvillian.space:
        raise ValueError("state lives on a different space")
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    if duration == 0:
        return rho0

    if initial_steps is None:
        scale = liouvillian.spectral_scale()
        initial_steps = max(16, math.ceil(duration * scale / _STEP_FRACTION))
    if initial_steps < 1:
        raise ValueError("initial_steps must be at least 1")

    steps = initial_steps
    for _ in range(max_halvings + 1):
        if steps > MAX_STEPS:
            raise IntegrationError(
                f"generator too stiff: {steps} RK4 steps exceed the cap {MAX_STEPS}"
            )
        result = _rk4_run(liouvillian, rho0.matrix, duration, steps, trace_tol)
        if result is not None:
            result = 0.5 * (result + result.conj().T)
            try:
                return DensityMatrix(liouvillian.space, result)
            except ValueError:
                pass  # not a valid state at this resolution: halve and retry
        steps *= 2
    raise IntegrationError(
        f"no valid state within trace drift {trace_tol} after {max_halvings} step halvings"
    )


def _rk4_run(
    liouvillian: Liouvillian,
    rho0: np.ndarray,
    duration: float,
    steps: int,
    trace_tol: float,
) -> np.ndarray | None:
    dt = duration / steps
    rho = rho0.astype(complex)
    rhs = liouvillian.apply
    for _ in range(steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        k3 = rhs(rho + 0.5 * dt * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
        # nan-safe: only verified small drift and bounded norm may continue
        # (physical states have Frobenius norm <= 1; blowup means instability)
        if not (drift < trace_tol and np.linalg.norm(rho) < 4.0):
            return None
    return rho


@dataclass(frozen=True)
class Evolve:
    """Schedule segment: free evolution under one generator."""

    generator: Liouvillian
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be nonnegative")


@dataclass(frozen=True)
class Apply:
    """Schedule segment: instantaneous unitary kick."""

    unitary: Operator

    def __post_init__(self):
        if not self.unitary.is_unitary():
            raise ValueError("Apply segment needs a unitary operator")


Segment = Union[Evolve, Apply]


def propagate_schedule(
    segments: Sequence[Segment],
    rho0: DensityMatrix,
    method: str = "expm",
    **rk4_options,
) -> DensityMatrix:
    """Run a pulse schedule segment by segment."""
    if method not in ("expm", "rk4"):
        raise ValueError(f"unknown method {method!r}")
    state = rho0
    for segment in segments:
        if isinstance(segment, Apply):
            u = segment.unitary
            if u.space != state.space:
                raise ValueError("unitary lives on a different space")
            state = DensityMatrix(state.space, u.matrix @ state.matrix @ u.dag().matrix)
        elif isinstance(segment, Evolve):
            if method == "expm":
                state = propagate_expm(segment.generator, state, segment.duration)
            else:
                state = propagate_rk4(segment.generator, state, segment.duration, **rk4_options)
        else:
            raise TypeError(f"unknown schedule segment {segment!r}")
    return state


def trace_distance(
    a: DensityMatrix | np.ndarray, b: DensityMatrix | np.ndarray
) -> float:
    """Half the trace norm of the difference of two Hermitian matrices."""
    ma = a.matrix if isinstance(a, DensityMatrix) else np.asarray(a)
    mb = b.matrix if isinstance(b, DensityMatrix) else np.asarray(b)
    diff = ma - mb
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def substream_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent RNG substream addressed by an integer path.

    The same (seed, key) always yields the same stream, and distinct keys
    yield statistically independent streams, so samples can be assigned
    to (sweep point, sample index) pairs without caring about execution
    order or process boundaries.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass(frozen=True)
class QuasiStaticNoise:
    """Gaussian quasi-static spread of one scalar parameter.

    One value is drawn per Monte Carlo trajectory from the substream
    (seed, point_index, sample_index), so sample assignments survive any
    re-partitioning of work across processes.
    """

    mean: float
    std: float
    label: str = "detuning"
    sample_count: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.std < 0:
            raise ValueError("noise std must be nonnegative")
        if self.sample_count < 1:
            raise ValueError("sample count must be at least 1")

    def draw(self, point_index: int, sample_index: int) -> float:
        rng = substream_rng(self.seed, point_index, sample_index)
        return self.mean + self.std * rng.standard_normal()


def _scalar_stats(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size > 1:
        std_error = float(values.std(ddof=1) / math.sqrt(values.size))
    else:
        std_error = float("nan")
    return mean, std_error


@dataclass(frozen=True)
class ObservableStat:
    """Sample statistics of one scalar observable over the trajectories."""

    name: str
    mean: float
    std_error: float
    values: np.ndarray

    def __post_init__(self):
        frozen = np.array(self.values, dtype=float)
        frozen.setflags(write=False)
        object.__setattr__(self, "values", frozen)


@dataclass(frozen=True)
class MonteCarloResult:
    mean_state: DensityMatrix
    observables: dict[str, ObservableStat]
    sample_count: int


def monte_carlo_quasistatic(
    model: Callable[[float], "Liouvillian | Sequence[Segment]"],
    noise: QuasiStaticNoise,
    rho0: DensityMatrix,
    duration: float | None = None,
    observables: dict[str, Callable[[DensityMatrix], float]] | None = None,
    *,
    point_index: int = 0,
    method: str = "expm",
) -> MonteCarloResult:
    """Average evolved states over quasi-static Gaussian parameter draws.

    ``model`` maps the drawn parameter value to either a Liouvillian
    (evolved for ``duration``) or a full schedule.  The mean state is a
    fixed-order sample average; each observable in ``observables`` is
    evaluated per trajectory and reported with its standard error.
    """
    observables = observables or {}
    accumulator = np.zeros((rho0.space.dim, rho0.space.dim), dtype=complex)
    series = {name: np.empty(noise.sample_count) for name in observables}
    for i in range(noise.sample_count):
        value = noise.draw(point_index, i)
        try:
            built = model(value)
            if isinstance(built, Liouvillian):
                if duration is None:
                    raise ValueError("duration required when the model yields a Liouvillian")
                if method == "rk4":
                    state = propagate_rk4(built, rho0, duration)
                else:
                    state = propagate_expm(built, rho0, duration)
            else:
                state = propagate_schedule(built, rho0, method=method)
        except Exception as exc:
            raise MonteCarloError(
                f"sample {i} ({noise.label}={value!r}) failed: {exc}"
            ) from exc
        accumulator += state.matrix
        for name, func in observables.items():
            series[name][i] = float(func(state))
    mean_state = DensityMatrix(rho0.space, accumulator / noise.sample_count)
    stats = {}
    for name, values in series.items():
        mean, std_error = _scalar_stats(values)
        stats[name] = ObservableStat(name=name, mean=mean, std_error=std_error, values=values)
    return MonteCarloResult(
        mean_state=mean_state, observables=stats, sample_count=noise.sample_count
    )


def monte_carlo_scalar(
    model: Callable[[float], float],
    noise: QuasiStaticNoise,
    *,
    point_index: int = 0,
    name: str = "observable",
) -> ObservableStat:
    """Average a plain scalar model over the same substream contract.

    Cheaper sibling of :func:`monte_carlo_quasistatic` for protocols that
    compute their trajectory observable without a density matrix (pure
    state fast paths).  Draws are identical to the full version's for
    the same noise, point and sample index.
    """
    values = np.empty(noise.sample_count, dtype=float)
    for i in range(noise.sample_count):
        value = noise.draw(point_index, i)
        try:
            values[i] = model(value)
        except Exception as exc:
            raise MonteCarloError(
                f"sample {i} ({noise.label}={value!r}) failed: {exc}"
            ) from exc
    mean, std_error = _scalar_stats(values)
    return ObservableStat(name=name, mean=mean, std_error=std_error, values=values)


def quasistatic_sigma(g: float, delta: float, gamma2: float, t_gate: float) -> float:
    """Quasi-static detuning spread equivalent to Markovian dephasing.

    Chosen so the Gaussian-averaged coherence loss equals the Lindblad
    prediction exactly at t_gate: sigma = (delta/g) * sqrt(2 gamma2 / t_gate).
    """
    if g <= 0 or t_gate <= 0:
        raise ValueError("coupling and gate time must be positive")
    if gamma2 < 0:
        raise ValueError("dephasing rate must be nonnegative")
    return abs(delta / g) * math.sqrt(2.0 * gamma2 / t_gate)
