"""Dense tensor-product states and operators for small open quantum systems.

Conventions used throughout the package:

* A :class:`HilbertSpace` is an ordered sequence of labeled subsystems.
  Composite matrices follow the Kronecker convention in which the first
  subsystem varies slowest, so embedding ``X`` on the first factor of a
  2 x 3 space yields ``kron(X, eye(3))``.
* Everything is a dense complex ``numpy`` array.  The largest space the
  package ever builds is a few tens of dimensions, so sparsity would buy
  nothing.
* Values are immutable after construction; matrices are defensively
  copied and marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "HilbertSpace",
    "Operator",
    "StateVector",
    "DensityMatrix",
    "annihilation",
    "number",
    "projector",
    "embed",
    "fidelity",
    "partial_trace",
]

TRACE_TOL = 1e-9
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-8
NORM_TOL = 1e-10


def _frozen_array(values, shape_check=None) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if shape_check is not None and arr.shape != shape_check:
        raise ValueError(f"expected array of shape {shape_check}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered collection of labeled subsystems.

    Parameters
    ----------
    subsystems:
        Sequence of ``(label, dimension)`` pairs.  Labels must be unique
    and dimensions positive integers.
    """

    subsystems: tuple[tuple[str, int], ...]

    def __init__(self, subsystems: Iterable[tuple[str, int]]):
        subs = tuple((str(label), int(dim)) for label, dim in subsystems)
        if not subs:
            raise ValueError("a HilbertSpace needs at least one subsystem")
        labels = [label for label, _ in subs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        for label, dim in subs:
            if dim < 1:
                raise ValueError(f"subsystem {label!r} has dimension {dim} < 1")
        object.__setattr__(self, "subsystems", subs)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.subsystems)

    @property
    def dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def index(self, label: str) -> int:
        """Position of ``label`` in the subsystem ordering."""
        for i, (name, _) in enumerate(self.subsystems):
            if name == label:
                return i
        raise KeyError(f"no subsystem labeled {label!r} in {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.subsystems[self.index(label)][1]

    def basis_state(self, occupations: Sequence[int]) -> "StateVector":
        """Product basis state ``|n_0, n_1, ...>`` with one index per subsystem."""
        if len(occupations) != len(self.subsystems):
            raise ValueError("need one basis index per subsystem")
        amps = np.zeros(self.dim, dtype=complex)
        flat = 0
        for n, (_, d) in zip(occupations, self.subsystems):
            if not 0 <= n < d:
                raise ValueError(f"basis index {n} out of range for dimension {d}")
            flat = flat * d + n
        amps[flat] = 1.0
        return StateVector(self, amps)


@dataclass(frozen=True)
class Operator:
    """Square matrix attached to a :class:`HilbertSpace`."""

    space: HilbertSpace
    matrix: np.ndarray

    def __init__(self, space: HilbertSpace, matrix):
        mat = _frozen_array(matrix, shape_check=(space.dim, space.dim))
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", mat)

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        """Hermiticity check with ``tol`` relative to the largest element."""
        scale = max(1.0, float(np.abs(self.matrix).max()))
        return float(np.abs(self.matrix - self.matrix.conj().T).max()) <= tol * scale

    def is_unitary(self, tol: float = 1e-10) -> bool:
        d = self.space.dim
        return float(np.abs(self.matrix @ self.matrix.conj().T - np.eye(d)).max()) <= tol

    @classmethod
    def identity(cls, space: HilbertSpace) -> "Operator":
        return cls(space, np.eye(space.dim))

    def _require_same_space(self, other: "Operator") -> None:
        if self.space != other.space:
            raise ValueError("operators live on different spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.matrix @ other.matrix)


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state; norm must be within 1e-10 of one."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __init__(self, space: HilbertSpace, amplitudes):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (space.dim,):
            raise ValueError(
                f"amplitude vector has length {amps.shape[0]}, space dimension is {space.dim}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm {norm} deviates from 1 by more than {NORM_TOL}")
        amps.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "amplitudes", amps)

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "StateVector") -> complex:
        if self.space != other.space:
            raise ValueError("states live on different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive-semidefinite Hermitian matrix.

    Construction enforces trace within 1e-9 of one, Hermiticity within
    1e-10 (max elementwise deviation) and eigenvalues above -1e-8.
    """

    space: HilbertSpace
    matrix: np.ndarray

    def __init__(self, space: HilbertSpace, matrix):
        mat = np.array(matrix, dtype=complex)
        if mat.shape != (space.dim, space.dim):
            raise ValueError(f"density matrix shape {mat.shape} does not match dim {space.dim}")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 by more than {TRACE_TOL}")
        herm_dev = float(np.abs(mat - mat.conj().T).max())
        if herm_dev > HERMITICITY_TOL:
            raise ValueError(f"Hermiticity deviation {herm_dev} exceeds {HERMITICITY_TOL}")
        eigs = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
        if float(eigs.min()) < -POSITIVITY_TOL:
            raise ValueError(f"negative eigenvalue {eigs.min()} below -{POSITIVITY_TOL}")
        mat.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        return psi.to_density_matrix()

    @classmethod
    def maximally_mixed(cls, space: HilbertSpace) -> "DensityMatrix":
        return cls(space, np.eye(space.dim) / space.dim)

    def expectation(self, op: Operator) -> complex:
        if op.space != self.space:
            raise ValueError("operator space does not match state space")
        return complex(np.trace(op.matrix @ self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def population(self, flat_index: int) -> float:
        return float(np.real(self.matrix[flat_index, flat_index]))


def annihilation(dimension: int, label: str = "mode") -> Operator:
    """Truncated bosonic annihilation operator ``a|n> = sqrt(n)|n-1>``.

    The operator lives on a fresh single-subsystem space so it can be fed
    to :func:`embed` unchanged.
    """
    if dimension < 2:
        raise ValueError(f"annihilation needs dimension >= 2, got {dimension}")
    mat = np.zeros((dimension, dimension), dtype=complex)
    for n in range(1, dimension):
        mat[n - 1, n] = np.sqrt(n)
    return Operator(HilbertSpace([(label, dimension)]), mat)


def number(dimension: int, label: str = "mode") -> Operator:
    """Occupation-number operator ``diag(0, 1, ..., dimension - 1)``."""
    if dimension < 2:
        raise ValueError(f"number needs dimension >= 2, got {dimension}")
    return Operator(HilbertSpace([(label, dimension)]), np.diag(np.arange(dimension, dtype=complex)))


def projector(i: int, j: int, dimension: int, label: str = "level") -> Operator:
    """Matrix unit ``|i><j|`` on a single subsystem of the given dimension."""
    if dimension < 1:
        raise ValueError("dimension must be positive")
    if not (0 <= i < dimension and 0 <= j < dimension):
        raise ValueError(f"indices ({i}, {j}) out of range for dimension {dimension}")
    mat = np.zeros((dimension, dimension), dtype=complex)
    mat[i, j] = 1.0
    return Operator(HilbertSpace([(label, dimension)]), mat)


def embed(op: Operator, space: HilbertSpace, label: str) -> Operator:
    """Tensor ``op`` with identities so it acts on subsystem ``label`` of ``space``.

    ``op`` must be a single-subsystem operator whose dimension matches the
    labeled subsystem.  The first subsystem of ``space`` is the slowest
    Kronecker index.
    """
    target = space.index(label)
    if len(op.space.subsystems) != 1:
        raise ValueError("embed expects a single-subsystem operator")
    if op.space.dim != space.dims[target]:
        raise ValueError(
            f"operator dimension {op.space.dim} does not match subsystem "
            f"{label!r} of dimension {space.dims[target]}"
        )
    out = np.array([[1.0 + 0.0j]])
    for pos, (_, d) in enumerate(space.subsystems):
        factor = op.matrix if pos == target else np.eye(d)
        out = np.kron(out, factor)
    return Operator(space, out)


def fidelity(rho: DensityMatrix | StateVector, target: StateVector) -> float:
    """Overlap ``<target| rho |target>`` as a real number in [0, 1].

    Raises if the imaginary part exceeds 1e-10, which would indicate a
    non-Hermitian input.
    """
    if isinstance(rho, StateVector):
        rho = rho.to_density_matrix()
    if rho.space != target.space:
        raise ValueError("state and target live on different spaces")
    val = complex(np.vdot(target.amplitudes, rho.matrix @ target.amplitudes))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"fidelity has imaginary part {val.imag}")
    return float(val.real)


def partial_trace(rho: DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep``.

    The reduced state keeps the original subsystem ordering regardless of
    the order given in ``keep``.
    """
    keep_set = set(keep)
    labels = rho.space.labels
    unknown = keep_set - set(labels)
    if unknown:
        raise ValueError(f"unknown labels {sorted(unknown)}; space has {labels}")
    if not keep_set:
        raise ValueError("must keep at least one subsystem")
    dims = rho.space.dims
    n = len(dims)
    tensor = rho.matrix.reshape(dims + dims)
    keep_pos = [i for i, lab in enumerate(labels) if lab in keep_set]
    # Repeated einsum indices trace the unwanted subsystems in one pass.
    row = list(range(n))
    col = [i + n if i in keep_pos else i for i in range(n)]
    out_idx = [i for i in keep_pos] + [i + n for i in keep_pos]
    reduced = np.einsum(tensor, row + col, out_idx)
    kept_dim = int(np.prod([dims[i] for i in keep_pos]))
    reduced = reduced.reshape(kept_dim, kept_dim)
    new_space = HilbertSpace([rho.space.subsystems[i] for i in keep_pos])
    return DensityMatrix(new_space, reduced)
