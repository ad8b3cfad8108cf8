"""Circuit parameters of the chip and the formulas that derive operating numbers.

Inputs are SI (henry, farad, ampere, kelvin, meter).  Derived frequencies
and rates are angular (rad/s) unless the function name says otherwise;
human-facing configuration uses linear Hz and converts through
:func:`to_angular` / :func:`to_linear`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "TWO_PI",
    "to_angular",
    "to_linear",
    "TlrParams",
    "CbjjParams",
    "CouplerParams",
    "FjsParams",
    "FjsDerived",
    "mode_frequency",
    "zero_point_current",
    "zero_point_voltage",
    "mode_profile",
    "coupling_strength",
    "transfer_rate",
    "effective_dephasing_rate",
    "induced_loss_rate",
    "thermal_occupancy",
    "fjs_derive",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants used by the derivations (SI)."""

    hbar: float = 1.054_571_817e-34
    e: float = 1.602_176_634e-19
    k_b: float = 1.380_649e-23

    @property
    def flux_quantum(self) -> float:
        """Superconducting flux quantum h / 2e."""
        return math.pi * self.hbar / self.e


CONSTANTS = PhysicalConstants()


def to_angular(frequency_hz: float) -> float:
    """Linear frequency in Hz to angular frequency in rad/s."""
    return frequency_hz * TWO_PI


def to_linear(omega: float) -> float:
    """Angular frequency in rad/s back to linear Hz.

    Implemented as division by the same 2 pi constant used in
    :func:`to_angular`.  The pair round-trips exactly for the frequency
    values this package feeds through it (checked in the test suite);
    exact inversion for every binary64 input is impossible because
    multiplication by an irrational constant is not injective in floating
    point.
    """
    return omega / TWO_PI


@dataclass(frozen=True)
class TlrParams:
    """Transmission line resonator: lumped totals plus the operating mode.

    ``photon_loss_rate`` is the angular energy decay rate kappa of the
    mode (rad/s).
    """

    inductance: float = 0.5e-9
    capacitance: float = 5.0e-12
    length: float = 4.0e-3
    mode_index: int = 2
    photon_loss_rate: float = TWO_PI * 1.0e4

    def __post_init__(self):
        if self.inductance <= 0 or self.capacitance <= 0 or self.length <= 0:
            raise ValueError("TLR inductance, capacitance and length must be positive")
        if self.mode_index < 1:
            raise ValueError("mode index must be a positive integer")
        if self.photon_loss_rate < 0:
            raise ValueError("photon loss rate must be nonnegative")


@dataclass(frozen=True)
class CbjjParams:
    """Current-biased Josephson junction used as a tunable coupler or detector.

    ``level_splitting`` is the angular qubit transition frequency, and the
    two rates are angular energy decay and pure dephasing.
    """

    junction_capacitance: float = 0.5e-12
    level_splitting: float = TWO_PI * 2.2e10
    decay_rate: float = TWO_PI * 1.0e5
    dephasing_rate: float = TWO_PI * 1.0e6

    def __post_init__(self):
        if self.junction_capacitance <= 0:
            raise ValueError("junction capacitance must be positive")
        if self.level_splitting <= 0:
            raise ValueError("level splitting must be positive")
        if self.decay_rate < 0 or self.dephasing_rate < 0:
            raise ValueError("rates must be nonnegative")


@dataclass(frozen=True)
class CouplerParams:
    """Capacitances coupling the resonators to the left and right junctions."""

    coupling_capacitance: float = 2.3e-14
    right_coupling_capacitance: float = 2.3e-14

    def __post_init__(self):
        if self.coupling_capacitance <= 0 or self.right_coupling_capacitance <= 0:
            raise ValueError("coupling capacitances must be positive")


@dataclass(frozen=True)
class FjsParams:
    """Four-junction SQUID interaction device.

    ``mutual_inductance_d`` may be ``None``, in which case it is solved so
    that both resonator couplings are equal (see :func:`fjs_derive`).
    ``phi_sq_spread_scale`` multiplies the phase-variance spread used for
    the frequency-shift uncertainty; 1.0 means one standard deviation.
    """

    junction_critical_current: float = 5.0e-5
    junction_capacitance: float = 1.0e-12
    shunt_capacitance: float = 1.9e-11
    squid_self_inductance: float = 1.0e-11
    loop_inductance: float = 1.0e-10
    mutual_inductance_c: float = 8.0e-11
    mutual_inductance_d: float | None = None
    bias_current: float = 0.0
    phi_sq_spread_scale: float = 1.0

    def __post_init__(self):
        if self.junction_critical_current <= 0:
            raise ValueError("critical current must be positive")
        if self.junction_capacitance <= 0 or self.shunt_capacitance < 0:
            raise ValueError("capacitances must be positive")
        if self.squid_self_inductance <= 0 or self.loop_inductance < 0:
            raise ValueError("inductances must be positive")
        if self.mutual_inductance_c <= 0:
            raise ValueError("mutual inductance must be positive")
        if self.mutual_inductance_d is not None and self.mutual_inductance_d <= 0:
            raise ValueError("mutual inductance must be positive")
        if self.phi_sq_spread_scale <= 0:
            raise ValueError("spread scale must be positive")


@dataclass(frozen=True)
class FjsDerived:
    """Derived operating point of the four-junction SQUID.

    Angular frequencies keep the sign produced by the defining formulas:
    ``omega_int`` and ``omega_s`` are negative for ``cos(phi0) > 0``
    (energy shifts point down), and ``delta_omega_s`` carries the same
    sign convention; magnitudes are what enter speed-ratio settings.
    """

    phi0: float
    alpha: float
    sigma_phi: float
    chi_c: float
    chi_d: float
    omega_int: float
    omega_s: float
    delta_omega_s: float
    delta_omega_int_rel: float
    mutual_inductance_d: float
    josephson_energy: float
    charging_energy: float

    def __post_init__(self):
        if self.alpha <= 0 or self.sigma_phi <= 0:
            raise ValueError("alpha and sigma_phi must be positive")
        if self.delta_omega_int_rel < 0:
            raise ValueError("relative interaction spread must be nonnegative")
        if math.cos(self.phi0) > 0 and self.omega_int >= 0:
            raise ValueError("interaction shift must be negative for cos(phi0) > 0")


def mode_frequency(tlr: TlrParams) -> float:
    """Angular frequency of the selected standing-wave mode, n pi / sqrt(LC)."""
    return tlr.mode_index * math.pi / math.sqrt(tlr.inductance * tlr.capacitance)


def zero_point_current(tlr: TlrParams, constants: PhysicalConstants = CONSTANTS) -> float:
    """Zero-point current amplitude sqrt(hbar * omega / L) of the mode."""
    return math.sqrt(constants.hbar * mode_frequency(tlr) / tlr.inductance)


def zero_point_voltage(tlr: TlrParams, constants: PhysicalConstants = CONSTANTS) -> float:
    """Zero-point voltage amplitude sqrt(hbar * omega / C) of the mode."""
    return math.sqrt(constants.hbar * mode_frequency(tlr) / tlr.capacitance)


def mode_profile(x: float, tlr: TlrParams) -> tuple[float, float]:
    """Standing-wave profile of the second-harmonic mode at position x.

    Returns ``(voltage_factor, current_factor)`` with the voltage antinode
    at the center: ``cos(2 pi x / l)`` and ``sin(2 pi x / l)``.  ``x`` is
    measured from the center and must satisfy ``|x| <= l / 2``.
    """
    if abs(x) > tlr.length / 2:
        raise ValueError(f"position {x} outside the resonator (length {tlr.length})")
    arg = TWO_PI * x / tlr.length
    return math.cos(arg), math.sin(arg)


def coupling_strength(
    omega: float,
    tlr_capacitance: float,
    coupling_capacitance: float,
    junction_capacitance: float,
) -> float:
    """Angular resonator-junction coupling g for a capacitive tap.

    g = omega * C_c / sqrt(2 C (C_J + 2 C_c)).  Warns when the coupling
    capacitor is not small against the resonator capacitance, where the
    lumped derivation starts to bend.
    """
    if min(omega, tlr_capacitance, coupling_capacitance, junction_capacitance) <= 0:
        raise ValueError("all arguments must be positive")
    if coupling_capacitance > 0.1 * tlr_capacitance:
        warnings.warn(
            "coupling capacitance above C/10; lumped coupling formula degrades",
            stacklevel=2,
        )
    denom = math.sqrt(2.0 * tlr_capacitance * (junction_capacitance + 2.0 * coupling_capacitance))
    return omega * coupling_capacitance / denom


def transfer_rate(g: float, delta: float) -> float:
    """Linear photon transfer rate g^2 / (2 pi Delta) in Hz.

    ``g`` and ``delta`` are angular.  Warns when |Delta| < 5 g, outside
    the dispersive regime the formula assumes.
    """
    if delta == 0:
        raise ValueError("detuning must be nonzero")
    if abs(delta) < 5.0 * g:
        warnings.warn("detuning below 5 g; dispersive transfer rate unreliable", stacklevel=2)
    return g * g / (TWO_PI * delta)


def effective_dephasing_rate(g: float, delta: float, gamma2: float) -> float:
    """Dephasing rate 2 (g/Delta)^2 Gamma_2 passed to the photon during transfer."""
    if delta == 0:
        raise ValueError("detuning must be nonzero")
    if gamma2 < 0:
        raise ValueError("dephasing rate must be nonnegative")
    ratio = g / delta
    return 2.0 * ratio * ratio * gamma2


def induced_loss_rate(g: float, delta: float, gamma1: float) -> float:
    """Photon loss rate (g/Delta)^2 Gamma_1 induced by junction decay."""
    if delta == 0:
        raise ValueError("detuning must be nonzero")
    if gamma1 < 0:
        raise ValueError("decay rate must be nonnegative")
    ratio = g / delta
    return ratio * ratio * gamma1


def thermal_occupancy(
    temperature: float, omega: float, constants: PhysicalConstants = CONSTANTS
) -> float:
    """Bose occupation 1 / (exp(hbar omega / k_B T) - 1).

    Returns 0 for zero temperature.  Uses expm1 so the classical limit
    k_B T >> hbar omega comes out accurate.
    """
    if temperature < 0:
        raise ValueError("temperature must be nonnegative")
    if omega <= 0:
        raise ValueError("mode frequency must be positive")
    if temperature == 0:
        return 0.0
    x = constants.hbar * omega / (constants.k_b * temperature)
    # exp(-x) / (1 - exp(-x)) == 1 / (exp(x) - 1) without overflow at large x
    return math.exp(-x) / -math.expm1(-x)


def _cos_fluctuation(phi0: float, var: float) -> tuple[float, float]:
    """Mean and standard deviation of cos(phi) for phi ~ N(phi0, var).

    Exact Gaussian moments, written with expm1 to survive the tiny
    variances this device produces.
    """
    mean = math.cos(phi0) * math.exp(-var / 2.0)
    cos_sq = math.cos(phi0) ** 2
    variance = -0.5 * math.expm1(-2.0 * var) + cos_sq * math.exp(-var) * math.expm1(-var)
    return mean, math.sqrt(max(variance, 0.0))


def fjs_derive(
    fjs: FjsParams,
    tlr_c: TlrParams,
    tlr_d: TlrParams | None = None,
    constants: PhysicalConstants = CONSTANTS,
) -> FjsDerived:
    """Operating point of the four-junction SQUID coupling two resonators.

    The SQUID phase sits in a harmonic well of width sigma_phi around the
    bias-set minimum phi0.  Resonator currents couple through chi factors
    set by the mutual inductances; when ``mutual_inductance_d`` is unset
    it is solved so both chi factors are equal.  The photon-photon
    interaction strength and the quasi-static spread of the single-photon
    frequency shift follow from the quartic and quadratic well terms.
    """
    if tlr_d is None:
        tlr_d = tlr_c
    e_j = constants.hbar * fjs.junction_critical_current / (2.0 * constants.e)
    total_cap = fjs.junction_capacitance + fjs.shunt_capacitance
    e_c = (2.0 * constants.e) ** 2 / (4.0 * total_cap)

    sin_phi0 = constants.hbar * fjs.bias_current / (8.0 * constants.e * e_j)
    if abs(sin_phi0) >= 1.0:
        raise ValueError("bias current exceeds the critical tilt of the SQUID well")
    phi0 = math.asin(sin_phi0)

    alpha = (4.0 * e_j * math.cos(phi0) / e_c) ** 0.25
    sigma_phi = 1.0 / (alpha * math.sqrt(2.0))

    flux_quantum = constants.flux_quantum
    i_c0 = zero_point_current(tlr_c, constants)
    i_d0 = zero_point_current(tlr_d, constants)
    i_crit = fjs.junction_critical_current

    denom_c = math.pi * fjs.squid_self_inductance * i_crit + flux_quantum
    chi_c = math.pi * fjs.mutual_inductance_c * i_c0 / denom_c

    denom_d = (
        math.pi * (fjs.squid_self_inductance + fjs.loop_inductance) * i_crit + flux_quantum
    )
    if fjs.mutual_inductance_d is None:
        m_d = chi_c * denom_d / (math.pi * i_d0)
    else:
        m_d = fjs.mutual_inductance_d
    chi_d = math.pi * m_d * i_d0 / denom_d

    var = sigma_phi * sigma_phi
    phi_sq_mean = phi0 * phi0 + var
    phi_sq_spread = fjs.phi_sq_spread_scale * math.sqrt(
        2.0 * var * var + 4.0 * phi0 * phi0 * var
    )

    chi_sq_c = chi_c * chi_c
    chi_sq_d = chi_d * chi_d
    omega_s = -2.0 * e_j * (phi_sq_mean * chi_sq_c + chi_sq_c * chi_sq_d) / constants.hbar
    delta_omega_s = -2.0 * e_j * chi_sq_c * phi_sq_spread / constants.hbar
    omega_int = -4.0 * e_j * chi_sq_c * chi_sq_d * math.cos(phi0) / constants.hbar

    cos_mean, cos_std = _cos_fluctuation(phi0, var)
    if cos_mean == 0.0:
        raise ValueError("bias point with vanishing mean cos(phi) has no defined spread ratio")
    delta_omega_int_rel = cos_std / abs(cos_mean)

    return FjsDerived(
        phi0=phi0,
        alpha=alpha,
        sigma_phi=sigma_phi,
        chi_c=chi_c,
        chi_d=chi_d,
        omega_int=omega_int,
        omega_s=omega_s,
        delta_omega_s=delta_omega_s,
        delta_omega_int_rel=delta_omega_int_rel,
        mutual_inductance_d=m_d,
        josephson_energy=e_j,
        charging_energy=e_c,
    )
