"""Lumped-element model of a dc-SQUID array transmission line.

A unit cell is a two-junction SQUID (treated as a single flux-tunable
Josephson inductance) in series with the line, shunted to ground by a cell
capacitance.  This module holds the static circuit relations (critical
current, plasma frequency, inductance, impedance, energy scales), a
model-validity audit, and two small time integrators for a single cell:
the full two-degree-of-freedom SQUID equations and the reduced single-phase
model they collapse to at small loop inductance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .bias import FluxPulse
from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import FluxOutOfRange, NonFinite, OverCritical

__all__ = [
    "JunctionParams",
    "SquidParams",
    "ArrayParams",
    "SquidState",
    "SquidTrajectory",
    "ReducedTrajectory",
    "ValidityCheck",
    "ValidityReport",
    "squid_critical_current",
    "effective_plasma_frequency",
    "josephson_inductance",
    "cell_velocity",
    "junction_energies",
    "beta_l",
    "array_impedance",
    "validity_report",
    "single_squid_dynamics",
    "reduced_junction_dynamics",
]


@dataclass(frozen=True)
class JunctionParams:
    """Single Josephson junction: critical current (A), capacitance (F),
    optional shunt/normal resistance (Ohm)."""

    critical_current: float
    capacitance: float
    normal_resistance: Optional[float] = None

    def __post_init__(self) -> None:
        if self.critical_current <= 0.0:
            raise ValueError("critical_current must be positive")
        if self.capacitance <= 0.0:
            raise ValueError("capacitance must be positive")
        if self.normal_resistance is not None and self.normal_resistance <= 0.0:
            raise ValueError("normal_resistance must be positive when given")


@dataclass(frozen=True)
class SquidParams:
    """Two identical junctions on a loop with geometric inductance (H)."""

    junction: JunctionParams
    loop_inductance: float

    def __post_init__(self) -> None:
        if self.loop_inductance < 0.0:
            raise ValueError("loop_inductance must be non-negative")


@dataclass(frozen=True)
class ArrayParams:
    """Transmission-line array: cell count, pitch (m), cell capacitance to
    ground (F) and the impedance of the external line/leads (Ohm)."""

    n_cells: int
    cell_length: float
    ground_capacitance: float
    environment_impedance: float = 50.0

    def __post_init__(self) -> None:
        if self.n_cells < 2:
            raise ValueError("n_cells must be at least 2")
        if self.cell_length <= 0.0:
            raise ValueError("cell_length must be positive")
        if self.ground_capacitance <= 0.0:
            raise ValueError("ground_capacitance must be positive")
        if self.environment_impedance < 0.0:
            raise ValueError("environment_impedance must be non-negative")


@dataclass(frozen=True)
class SquidState:
    """Phase-space point of one SQUID: common (average) junction phase,
    circulating (half-difference) phase, and their rates in rad/s."""

    common_phase: float = 0.0
    circulating_phase: float = 0.0
    common_rate: float = 0.0
    circulating_rate: float = 0.0


@dataclass(frozen=True)
class SquidTrajectory:
    """Sampled solution of the full two-phase SQUID equations."""

    times: np.ndarray
    common_phase: np.ndarray
    circulating_phase: np.ndarray
    common_rate: np.ndarray
    circulating_rate: np.ndarray


@dataclass(frozen=True)
class ReducedTrajectory:
    """Sampled solution of the reduced single-phase model with the energy
    diagnostic of the staggered integrator."""

    times: np.ndarray
    phase: np.ndarray
    rate: np.ndarray
    energy: np.ndarray
    energy_drift: float

    @property
    def is_running(self) -> bool:
        """True when the phase has advanced beyond bound oscillation."""
        return bool(abs(self.phase[-1] - self.phase[0]) > 4.0 * math.pi)


def squid_critical_current(squid: SquidParams, flux: float,
                           constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Effective critical current 2*I_c*cos(pi*flux/Phi_0) of the SQUID.

    The SQUID behaves as one junction whose critical current is tuned by the
    loop flux.  Raises FluxOutOfRange at or beyond half a flux quantum,
    where the effective inductance diverges.
    """
    phi0 = constants.flux_quantum
    fraction = flux / phi0
    if abs(fraction) >= 0.5:
        raise FluxOutOfRange(
            "flux %.4g Phi_0 outside the open interval (-0.5, 0.5)" % fraction
        )
    return 2.0 * squid.junction.critical_current * math.cos(math.pi * fraction)


def effective_plasma_frequency(squid: SquidParams, flux: float,
                               constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Plasma frequency (rad/s) of the flux-tuned SQUID.

    Uses the parallel capacitance of the two junctions, so at zero flux it
    coincides with the single-junction plasma frequency.
    """
    ics = squid_critical_current(squid, flux, constants)
    cj2 = 2.0 * squid.junction.capacitance
    return math.sqrt(2.0 * math.pi * ics / (cj2 * constants.flux_quantum))


def _arcsine_factor(x: float) -> float:
    # asin(x)/x, with the series branch below 1e-6 to avoid 0/0.
    if abs(x) < 1.0e-6:
        return 1.0 + x * x / 6.0
    return math.asin(x) / x


def josephson_inductance(squid: SquidParams, flux: float, current: float = 0.0,
                         constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Current- and flux-dependent Josephson inductance of one cell (H).

    L = Phi_0 * asin(I/I_c^s) / (2*pi*I), continued to Phi_0/(2*pi*I_c^s)
    at zero current.  Raises OverCritical for |I| beyond the effective
    critical current; |I| equal to it is allowed and gives (pi/2) times the
    zero-current value.
    """
    ics = squid_critical_current(squid, flux, constants)
    x = current / ics
    if abs(x) > 1.0:
        raise OverCritical(
            "bias current %.4g A exceeds effective critical current %.4g A"
            % (current, ics)
        )
    base = constants.flux_quantum / (2.0 * math.pi * ics)
    return base * _arcsine_factor(x)


def cell_velocity(array: ArrayParams, squid: SquidParams, flux: float,
                  current: float = 0.0,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Low-frequency propagation speed a/sqrt(L*C0) of the loaded line (m/s)."""
    ind = josephson_inductance(squid, flux, current, constants)
    return array.cell_length / math.sqrt(ind * array.ground_capacitance)


def junction_energies(squid: SquidParams, flux: float,
                      constants: PhysicalConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    """Josephson and charging energy scales (E_J, E_C) in joules.

    E_J uses the flux-tuned critical current; E_C = e^2/(4*C_J) is the
    charging energy of the parallel pair.  Arrays with E_J >> E_C stay in
    the phase regime where the inductance picture applies.
    """
    ics = squid_critical_current(squid, flux, constants)
    e_j = constants.flux_quantum * ics / (2.0 * math.pi)
    e_c = constants.electron_charge ** 2 / (4.0 * squid.junction.capacitance)
    return e_j, e_c


def beta_l(squid: SquidParams,
           constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Screening parameter 2*pi*L_loop*I_c/Phi_0 of the loop."""
    return (2.0 * math.pi * squid.loop_inductance *
            squid.junction.critical_current / constants.flux_quantum)


def array_impedance(array: ArrayParams, squid: SquidParams, flux: float,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Quantum impedance of the biased line (Ohm), the phase-slip audit scale.

    Z_A = R_Q * sqrt(2*pi*e^2 / (Phi_0*C0*I_c) * sec(pi*flux/Phi_0)) with
    R_Q the superconducting resistance quantum and I_c the single-junction
    critical current.  Values approaching R_Q mark the onset of strong
    quantum phase slips.  This differs from the wave impedance sqrt(L/C0)
    by a constant factor pi*sqrt(2); ratios between flux settings agree.
    """
    phi0 = constants.flux_quantum
    fraction = flux / phi0
    if abs(fraction) >= 0.5:
        raise FluxOutOfRange(
            "flux %.4g Phi_0 outside the open interval (-0.5, 0.5)" % fraction
        )
    e = constants.electron_charge
    inner = (2.0 * math.pi * e * e /
             (phi0 * array.ground_capacitance * squid.junction.critical_current))
    return constants.resistance_quantum * math.sqrt(inner / math.cos(math.pi * fraction))


@dataclass(frozen=True)
class ValidityCheck:
    """One audit entry; passes when value <= threshold."""

    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.value <= self.threshold

    @property
    def margin(self) -> float:
        """Positive margin means the check passes with room to spare."""
        return self.threshold - self.value


@dataclass(frozen=True)
class ValidityReport:
    """Collected model-validity checks; failures are reported, not raised."""

    checks: tuple[ValidityCheck, ...]

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ValidityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validity_report(array: ArrayParams, squid: SquidParams, pulse: FluxPulse,
                    max_signal_frequency: float,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ValidityReport:
    """Audit the configuration against the approximations of the model.

    Checks, each normalised so that value <= threshold passes:

    - screening: beta_L small enough to slave the circulating phase,
    - signal_band: signal frequencies a decade under the plasma frequency
      at peak flux,
    - peak_flux: stay clear of the half-quantum inductance pole,
    - impedance: environment plus line impedance at peak flux below the
      resistance quantum (phase-slip protection),
    - energy_ratio: charging energy below the Josephson energy at peak flux,
    - pulse_speed: front slower than the propagation speed on the dc plateau.

    max_signal_frequency is the largest angular frequency (rad/s) the run
    intends to resolve.
    """
    phi0 = constants.flux_quantum
    peak = pulse.peak_fraction()
    peak_flux = peak * phi0
    dc_flux = pulse.dc_offset * phi0

    omega_ps_peak = effective_plasma_frequency(squid, peak_flux, constants)
    e_j, e_c = junction_energies(squid, peak_flux, constants)
    z_total = (array.environment_impedance +
               array_impedance(array, squid, peak_flux, constants))
    c_dc = cell_velocity(array, squid, dc_flux, 0.0, constants)

    checks = (
        ValidityCheck("screening", beta_l(squid, constants), 0.1),
        ValidityCheck("signal_band",
                      max_signal_frequency / omega_ps_peak, 0.1),
        ValidityCheck("peak_flux", peak, 0.45),
        ValidityCheck("impedance",
                      z_total / constants.resistance_quantum, 1.0),
        ValidityCheck("energy_ratio", e_c / e_j, 1.0),
        ValidityCheck("pulse_speed", pulse.velocity / c_dc, 1.0),
    )
    return ValidityReport(checks)


DriveLike = float | Sequence[float] | np.ndarray | Callable[[float], float]


def _as_time_function(value: DriveLike, dt: float, n_steps: int) -> Callable[[float], float]:
    """Normalise a drive given as scalar, sample array or callable of t (s)."""
    if callable(value):
        return value
    if np.ndim(value) == 0:
        const = float(value)
        return lambda t: const
    samples = np.asarray(value, dtype=float)
    if samples.size < n_steps + 1:
        raise ValueError(
            "sampled drive needs n_steps + 1 = %d points, got %d"
            % (n_steps + 1, samples.size)
        )
    grid = np.arange(samples.size) * dt
    return lambda t: float(np.interp(t, grid, samples))


def single_squid_dynamics(squid: SquidParams,
                          drive_current: DriveLike,
                          external_flux: DriveLike,
                          initial: SquidState,
                          dt: float,
                          n_steps: int,
                          constants: PhysicalConstants = DEFAULT_CONSTANTS) -> SquidTrajectory:
    """Integrate the full two-phase SQUID equations of motion.

    The common phase is driven by the bias current through the junction
    nonlinearity cos(circulating)*sin(common); the circulating phase is
    pinned to the applied loop flux with stiffness 2/beta_L.  Damping enters
    only when the junction has a normal resistance.  Classic fourth-order
    Runge-Kutta in plasma-frequency time; dt must not exceed 0.05/omega_p.

    drive_current and external_flux may each be a constant, a callable of
    time in seconds, or an array sampled at the step times.

    Raises NonFinite if the state overflows.
    """
    jj = squid.junction
    phi0 = constants.flux_quantum
    omega_p = math.sqrt(2.0 * math.pi * jj.critical_current /
                        (jj.capacitance * phi0))
    if dt > 0.05 / omega_p:
        raise ValueError("dt must satisfy dt <= 0.05/omega_p = %.3e s"
                         % (0.05 / omega_p))
    blq = beta_l(squid, constants)
    if blq <= 0.0:
        raise ValueError("full SQUID dynamics needs positive loop inductance")
    if jj.normal_resistance is None:
        delta = 0.0
    else:
        omega_c = 2.0 * math.pi * jj.critical_current * jj.normal_resistance / phi0
        delta = omega_p / omega_c

    current = _as_time_function(drive_current, dt, n_steps)
    flux = _as_time_function(external_flux, dt, n_steps)
    two_ic = 2.0 * jj.critical_current

    h = dt * omega_p
    sin, cos = math.sin, math.cos

    def rhs(tau, gp, gm, vp, vm):
        t = tau / omega_p
        ibar = current(t) / two_ic
        fbar = 2.0 * math.pi * flux(t) / phi0
        # Guard the drives where they enter: a non-finite value would reach
        # sin/cos through the stage states before the end-of-step check.
        if not math.isfinite(ibar + fbar):
            raise NonFinite("drive became non-finite at t = %.6e s" % t)
        ap = ibar - cos(gm) * sin(gp) - delta * vp
        am = (fbar - 2.0 * gm) / blq - cos(gp) * sin(gm) - delta * vm
        return vp, vm, ap, am

    gp = initial.common_phase
    gm = initial.circulating_phase
    vp = initial.common_rate / omega_p
    vm = initial.circulating_rate / omega_p

    out = np.empty((n_steps + 1, 4))
    out[0] = gp, gm, vp, vm
    tau = 0.0
    for i in range(1, n_steps + 1):
        k1 = rhs(tau, gp, gm, vp, vm)
        k2 = rhs(tau + 0.5 * h, gp + 0.5 * h * k1[0], gm + 0.5 * h * k1[1],
                 vp + 0.5 * h * k1[2], vm + 0.5 * h * k1[3])
        k3 = rhs(tau + 0.5 * h, gp + 0.5 * h * k2[0], gm + 0.5 * h * k2[1],
                 vp + 0.5 * h * k2[2], vm + 0.5 * h * k2[3])
        k4 = rhs(tau + h, gp + h * k3[0], gm + h * k3[1],
                 vp + h * k3[2], vm + h * k3[3])
        gp += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        gm += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        vp += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        vm += h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
        tau += h
        out[i] = gp, gm, vp, vm
        if not math.isfinite(gp + gm + vp + vm):
            raise NonFinite("state overflowed at step %d" % i)

    times = np.arange(n_steps + 1) * dt
    return SquidTrajectory(
        times=times,
        common_phase=out[:, 0],
        circulating_phase=out[:, 1],
        common_rate=out[:, 2] * omega_p,
        circulating_rate=out[:, 3] * omega_p,
    )


def reduced_junction_dynamics(squid: SquidParams,
                              drive_current: DriveLike,
                              external_flux: DriveLike,
                              initial_phase: float,
                              initial_rate: float,
                              dt: float,
                              n_steps: int,
                              constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ReducedTrajectory:
    """Integrate the reduced single-phase model of the flux-tuned SQUID.

    Valid for beta_L << 1, where the circulating phase follows the applied
    flux and the cell reduces to one junction with critical current
    I_c^s(flux) and the matching plasma frequency.  Uses velocity-Verlet
    (kick-drift-kick), which is symplectic for static drives; the reported
    energy uses the half-step-consistent estimator
    v^2/2 - (dt*a)^2/8 + U, whose drift stays at round-off for bound motion.

    initial_rate is d(phase)/dt in rad/s.  dt must not exceed
    0.05/omega_p^s at the initial flux.
    """
    current = _as_time_function(drive_current, dt, n_steps)
    flux = _as_time_function(external_flux, dt, n_steps)

    omega_ref = effective_plasma_frequency(squid, flux(0.0), constants)
    if dt > 0.05 / omega_ref:
        raise ValueError("dt must satisfy dt <= 0.05/omega_p^s = %.3e s"
                         % (0.05 / omega_ref))
    ics_ref = squid_critical_current(squid, flux(0.0), constants)

    h = dt * omega_ref
    sin, cos = math.sin, math.cos

    def accel_and_potential(gamma: float, t: float) -> tuple[float, float]:
        ics = squid_critical_current(squid, flux(t), constants)
        w2 = ics / ics_ref  # (omega_p^s / omega_ref)^2
        ibar = current(t) / ics
        a = w2 * (ibar - sin(gamma))
        u = w2 * (1.0 - cos(gamma) - ibar * gamma)
        return a, u

    gamma = float(initial_phase)
    v = float(initial_rate) / omega_ref

    phases = np.empty(n_steps + 1)
    rates = np.empty(n_steps + 1)
    energies = np.empty(n_steps + 1)

    a, u = accel_and_potential(gamma, 0.0)
    phases[0], rates[0] = gamma, v
    energies[0] = 0.5 * v * v - h * h * a * a / 8.0 + u
    for i in range(1, n_steps + 1):
        v_half = v + 0.5 * h * a
        gamma += h * v_half
        t = i * dt
        a, u = accel_and_potential(gamma, t)
        v = v_half + 0.5 * h * a
        phases[i], rates[i] = gamma, v
        energies[i] = 0.5 * v * v - h * h * a * a / 8.0 + u
    if not (np.isfinite(phases).all() and np.isfinite(rates).all()):
        raise NonFinite("trajectory contains non-finite samples")

    scale = max(abs(energies[0]), 1.0e-300)
    drift = abs(energies[-1] - energies[0]) / scale
    times = np.arange(n_steps + 1) * dt
    return ReducedTrajectory(
        times=times,
        phase=phases,
        rate=rates * omega_ref,
        energy=energies,
        energy_drift=float(drift),
    )
