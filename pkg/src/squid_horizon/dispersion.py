"""Lattice dispersion: analytic relation, measurement, and cutoff scales.

The discrete line carries waves with omega = (2/sqrt(L C0)) |sin(k a / 2)|,
linear at long wavelength with speed a/sqrt(L C0) and saturating at the zone
edge.  The measurement path drives a uniform line with a soft sinusoidal
source, demodulates the steady state at the drive frequency and fits the
spatial phase, which is how the relation would be mapped out on hardware.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bias, circuit, lattice
from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import BandLimit, FitFailure, OutOfBand

__all__ = [
    "FRONT_KA_LIMIT",
    "CutoffReport",
    "DispersionCurve",
    "cutoff_scale",
    "front_spectral_fraction",
    "front_resolved",
    "group_velocity",
    "measure_dispersion",
    "omega_analytic",
    "write_dispersion_csv",
]

# Bias fronts with spectral weight above half a radian per cell undercut the
# smooth-geometry picture; front_resolved flags them.
FRONT_KA_LIMIT = 0.5


@dataclass(frozen=True)
class DispersionCurve:
    """Sampled dispersion points, sorted by wavenumber.

    ``omega_measured`` is NaN where a point carries no measurement.
    """

    wavenumbers: np.ndarray
    omega_analytic: np.ndarray
    omega_measured: np.ndarray
    inductance: float
    capacitance: float
    cell_length: float

    def __len__(self) -> int:
        return len(self.wavenumbers)

    @property
    def relative_errors(self) -> np.ndarray:
        return np.abs(self.omega_measured - self.omega_analytic) / self.omega_analytic


@dataclass(frozen=True)
class CutoffReport:
    """Shortest geometric scale c/omega_p versus the lattice pitch."""

    scale: float
    cell_length: float

    @property
    def resolves_lattice(self) -> bool:
        return self.scale > self.cell_length


def _check_band(k, cell_length):
    k = np.asarray(k, dtype=float)
    edge = math.pi / cell_length
    if np.any(np.abs(k) > edge * (1.0 + 1e-12)):
        raise OutOfBand("|k| exceeds the zone edge pi/a = %.4e 1/m" % edge)
    return k


def omega_analytic(k, inductance: float, capacitance: float,
                   cell_length: float):
    """Lattice frequency (2/sqrt(L C0)) |sin(k a / 2)| in rad/s."""
    k = _check_band(k, cell_length)
    scale = 2.0 / math.sqrt(inductance * capacitance)
    out = scale * np.abs(np.sin(0.5 * k * cell_length))
    return float(out) if out.ndim == 0 else out


def group_velocity(k, inductance: float, capacitance: float,
                   cell_length: float):
    """Slope of the dispersion branch, c cos(k a / 2), signed with k."""
    k = _check_band(k, cell_length)
    speed = cell_length / math.sqrt(inductance * capacitance)
    sign = np.where(k < 0.0, -1.0, 1.0)
    out = sign * speed * np.cos(0.5 * k * cell_length)
    return float(out) if out.ndim == 0 else out


def cutoff_scale(array: circuit.ArrayParams, squid: circuit.SquidParams,
                 flux: float,
                 constants: PhysicalConstants = DEFAULT_CONSTANTS) -> CutoffReport:
    """Analogue short-distance scale c/omega_p at the given flux bias.

    Both the propagation speed and the plasma frequency scale with the same
    root-cosine flux factor, so the reported scale is flux-independent; it
    exceeding the cell length is what lets the smooth description apply.
    """
    speed = circuit.cell_velocity(array, squid, flux, 0.0, constants)
    omega = circuit.effective_plasma_frequency(squid, flux, constants)
    return CutoffReport(scale=speed / omega, cell_length=array.cell_length)


def _demodulate(samples: np.ndarray, times: np.ndarray, omega: float):
    # Least-squares projection on cos/sin of the drive; exact for a pure
    # tone regardless of whether the window covers whole periods.
    c = np.cos(omega * times)
    s = np.sin(omega * times)
    gram = np.array([[c @ c, c @ s], [c @ s, s @ s]])
    rhs = np.vstack([samples.T @ c, samples.T @ s])
    coef = np.linalg.solve(gram, rhs)
    return coef[0] + 1j * coef[1]


def measure_dispersion(array: circuit.ArrayParams, squid: circuit.SquidParams,
                       flux_dc: float, frequencies,
                       amplitude: float = 1.0e-6,
                       settle_periods: float = 4.0,
                       fit_periods: float = 8.0,
                       wavelengths_in_window: float = 10.0,
                       courant_fraction: float = 0.1,
                       residual_threshold: float = 0.2,
                       constants: PhysicalConstants = DEFAULT_CONSTANTS) -> DispersionCurve:
    """Map the dispersion relation by driving uniform lines, one per point.

    Each drive frequency gets its own line, sized so the phase fit spans the
    requested number of wavelengths.  Raises BandLimit for drives above 95%
    of the band edge and FitFailure when the steady state yields no usable
    phase profile.
    """
    ind = circuit.josephson_inductance(squid, flux_dc, constants=constants)
    cap = array.ground_capacitance
    a = array.cell_length
    omega_max = 2.0 / math.sqrt(ind * cap)
    frequencies = [float(w) for w in frequencies]
    for w in frequencies:
        if w > 0.95 * omega_max:
            raise BandLimit("drive %.3e rad/s above 0.95 of the band edge "
                            "%.3e rad/s" % (w, omega_max))
        if w <= 0.0:
            raise ValueError("drive frequencies must be positive")

    flux_fraction = flux_dc / constants.flux_quantum
    pulse = bias.FluxPulse(amplitude=0.0, dc_offset=flux_fraction)
    dt = lattice.stable_timestep(array, squid, pulse, courant_fraction,
                                 constants)

    measured_k = []
    for w in frequencies:
        ka = 2.0 * math.asin(w / omega_max)
        wavelength_cells = 2.0 * math.pi / ka
        window_start = 60
        window_cells = int(math.ceil(wavelengths_in_window * wavelength_cells))
        n = window_start + window_cells + 60
        line = circuit.ArrayParams(n_cells=n, cell_length=a,
                                   ground_capacitance=cap,
                                   environment_impedance=array.environment_impedance)

        drive = lattice.SineDrive(node=0, amplitude=amplitude, frequency=w)
        v_group = (a / math.sqrt(ind * cap)) * math.cos(0.5 * ka)
        period = 2.0 * math.pi / w
        settle_time = n * a / v_group + settle_periods * period
        settle_steps = int(math.ceil(settle_time / dt))
        fit_steps = int(math.ceil(fit_periods * period / dt))

        warmup = lattice.run(lattice.zero_state(line), line, squid, pulse,
                             lattice.SolverConfig(n_steps=settle_steps, dt=dt,
                                                  boundary="driven"),
                             drive=drive, constants=constants)
        window = range(window_start, window_start + window_cells)
        traj = lattice.run(warmup.final_state, line, squid, pulse,
                           lattice.SolverConfig(n_steps=fit_steps, dt=dt,
                                                boundary="driven"),
                           drive=drive, probe_nodes=window,
                           constants=constants)

        phasors = _demodulate(traj.probe_values, traj.probe_times, w)
        if np.max(np.abs(phasors)) < 1e-9 * max(abs(amplitude), 1e-30):
            raise FitFailure("no steady wave at %.3e rad/s" % w)
        phase = np.unwrap(np.angle(phasors))
        x = traj.positions[window]
        slope, intercept = np.polyfit(x, phase, 1)
        residual = phase - (slope * x + intercept)
        rms = float(np.sqrt(np.mean(residual ** 2)))
        if rms > residual_threshold:
            raise FitFailure("phase fit residual %.3f rad at %.3e rad/s"
                             % (rms, w))
        measured_k.append(abs(slope))

    k = np.array(measured_k)
    order = np.argsort(k)
    k = k[order]
    w_drive = np.array(frequencies)[order]
    w_ana = (omega_analytic(k, ind, cap, a) if len(k)
             else np.empty(0))
    return DispersionCurve(wavenumbers=k, omega_analytic=np.atleast_1d(w_ana),
                           omega_measured=w_drive, inductance=ind,
                           capacitance=cap, cell_length=a)


def front_spectral_fraction(pulse: bias.FluxPulse,
                            array: circuit.ArrayParams,
                            time: float = 0.0) -> float:
    """Fraction of the front-gradient power above ka = FRONT_KA_LIMIT."""
    a = array.cell_length
    s = pulse.steepness_at(time)
    width = 1.0 / max(s, 1.0 / (array.n_cells * a))
    span = max(40.0 * width, 40.0 * a)
    m = 8192
    x = np.linspace(-span, span, m, endpoint=False)
    dx = 2.0 * span / m
    frac = bias.comoving_flux_fraction(pulse, x + pulse.front_position, time)
    # Scalar spacing keeps the gradient of a constant profile exactly zero;
    # per-point spacings would inject rounding noise across the spectrum.
    gradient = np.gradient(frac, dx)
    power = np.abs(np.fft.rfft(gradient)) ** 2
    k = 2.0 * np.pi * np.fft.rfftfreq(m, d=dx)
    total = power.sum()
    if total == 0.0:
        return 0.0
    return float(power[k * a > FRONT_KA_LIMIT].sum() / total)


def front_resolved(pulse: bias.FluxPulse, array: circuit.ArrayParams,
                   time: float = 0.0, power_tolerance: float = 1e-3) -> bool:
    """True when the bias front is smooth on the lattice scale."""
    return front_spectral_fraction(pulse, array, time) <= power_tolerance


def write_dispersion_csv(path, curve: DispersionCurve) -> None:
    """Write the curve as CSV: k, omega_analytic, omega_measured, rel_error."""
    with open(path, "w", newline="") as fh:
        fh.write("k,omega_analytic,omega_measured,rel_error\n")
        for i in range(len(curve)):
            rel = (abs(curve.omega_measured[i] - curve.omega_analytic[i]) /
                   curve.omega_analytic[i])
            fh.write("%.12e,%.12e,%.12e,%.12e\n" % (
                curve.wavenumbers[i], curve.omega_analytic[i],
                curve.omega_measured[i], rel))
