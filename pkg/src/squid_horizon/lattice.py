"""Time-domain solver for the discrete transmission-line equations.

The line is integrated in a charge-like representation: the per-cell field
``A_n`` (volts) is the charge transported through cell n divided by the
ground capacitance, so adjacent-cell differences are capacitor voltages and
the conjugate momentum ``q_n = L_n C0 dA_n/dt`` is minus the branch flux.
Kirchhoff's laws then read

    dq_n/dt = A_{n+1} - 2 A_n + A_{n-1},      dA_n/dt = q_n / (L_n C0),

which a staggered leapfrog integrates exactly in its conservative structure:
``q`` lives on half steps and the cell inductance is sampled at the half
step, so a time-varying flux bias enters only through the ``A`` update.

Internally the solver is nondimensionalized (time in units of the inverse
zero-bias plasma frequency, inductance in units of the zero-bias cell
inductance) to keep both arrays near the drive amplitude; all public
interfaces are SI.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bias, circuit
from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import (
    BandLimit,
    CourantViolation,
    NoPacket,
    NonFinite,
    OverCritical,
    ParseError,
)

__all__ = [
    "LatticeState",
    "LatticeTrajectory",
    "SineDrive",
    "SolverConfig",
    "gaussian_packet",
    "inject_sine",
    "measure_pulse_speed",
    "read_trajectory_binary",
    "run",
    "stable_timestep",
    "step",
    "write_trajectory_binary",
    "write_trajectory_csv",
    "zero_state",
]

_BOUNDARIES = ("reflecting", "absorbing", "driven")
_BINARY_MAGIC = b"SQHZ1"


@dataclass(frozen=True)
class LatticeState:
    """Snapshot of the line at one instant.

    ``momentum`` is staggered half a step behind ``time`` (leapfrog layout),
    so a state produced with timestep dt continues consistently only under
    the same dt.  Chained runs agree with an uninterrupted run to roundoff
    (momentum is stored in SI and rescaled internally).
    """

    time: float
    potential: np.ndarray
    momentum: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "potential",
                           np.asarray(self.potential, dtype=float))
        object.__setattr__(self, "momentum",
                           np.asarray(self.momentum, dtype=float))
        if self.potential.shape != self.momentum.shape:
            raise ValueError("potential and momentum lengths differ")

    @property
    def n_cells(self) -> int:
        return len(self.potential)

    @property
    def voltages(self) -> np.ndarray:
        """Capacitor voltages A_n - A_{n-1}, referenced to the open left port."""
        return np.diff(self.potential, prepend=0.0)


@dataclass(frozen=True)
class SolverConfig:
    """Stepping, boundary and recording settings for one run.

    dt = None picks courant_fraction * sqrt(L_min C0) with L_min the cell
    inductance at the smallest flux the bias reaches.  record_every = 0
    records only the initial and final snapshots.
    """

    n_steps: int
    dt: Optional[float] = None
    courant_fraction: float = 0.2
    boundary: str = "reflecting"
    record_every: int = 0
    current_dependent_inductance: bool = False
    check_every: int = 128

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if not 0.0 < self.courant_fraction <= 0.5:
            raise ValueError("courant_fraction must lie in (0, 0.5]")
        if self.boundary not in _BOUNDARIES:
            raise ValueError("boundary must be one of %s" % (_BOUNDARIES,))
        if self.record_every < 0:
            raise ValueError("record_every must be non-negative")
        if self.check_every < 1:
            raise ValueError("check_every must be positive")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class SineDrive:
    """Soft sinusoidal source added to the potential at one node."""

    node: int
    amplitude: float
    frequency: float


@dataclass(frozen=True)
class LatticeTrajectory:
    """Recorded run output.

    Snapshot arrays have one row per recorded instant; probe waveforms are
    sampled every step.  ``currents`` follow the I_n = -C0 dA_n/dt sign
    convention, centred in time to second order.
    """

    times: np.ndarray
    potentials: np.ndarray
    currents: np.ndarray
    energies: np.ndarray
    energy_density: np.ndarray
    positions: np.ndarray
    probe_nodes: tuple
    probe_times: np.ndarray
    probe_values: np.ndarray
    final_state: LatticeState

    @property
    def energy_drift(self) -> float:
        """Largest relative excursion of the recorded total energy."""
        e0 = self.energies[0]
        scale = max(abs(e0), 1e-300)
        return float(np.max(np.abs(self.energies - e0)) / scale)


def zero_state(array: circuit.ArrayParams) -> LatticeState:
    n = array.n_cells
    return LatticeState(time=0.0, potential=np.zeros(n), momentum=np.zeros(n))


def _laplacian(a: np.ndarray) -> np.ndarray:
    # Free-end closure: pad the bond differences with zeros so the operator
    # stays symmetric (this is what makes the product energy conserve).
    return np.diff(np.diff(a), prepend=0.0, append=0.0)


def _minimum_inductance(squid: circuit.SquidParams, pulse: bias.FluxPulse,
                        constants: PhysicalConstants) -> float:
    # The bias sweeps flux fractions between the dc offset and offset plus
    # amplitude; the smallest |flux| gives the stiffest cell.
    candidates = (abs(pulse.dc_offset),
                  abs(pulse.dc_offset + pulse.amplitude))
    frac = min(candidates)
    return circuit.josephson_inductance(squid, frac * constants.flux_quantum,
                                        constants=constants)


def stable_timestep(array: circuit.ArrayParams, squid: circuit.SquidParams,
                    pulse: bias.FluxPulse, courant_fraction: float = 0.2,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Default timestep courant_fraction * sqrt(L_min C0)."""
    l_min = _minimum_inductance(squid, pulse, constants)
    return courant_fraction * np.sqrt(l_min * array.ground_capacitance)


def inject_sine(array: circuit.ArrayParams, squid: circuit.SquidParams,
                node: int, amplitude: float, frequency: float,
                peak_flux_fraction: float = 0.0,
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> SineDrive:
    """Build a soft source, checking the drive sits inside the lattice band.

    The cutoff 2/sqrt(L C0) is evaluated at the largest flux the drive must
    propagate through; above it the line carries no travelling wave.
    """
    ind = circuit.josephson_inductance(
        squid, peak_flux_fraction * constants.flux_quantum, constants=constants)
    omega_max = 2.0 / np.sqrt(ind * array.ground_capacitance)
    if frequency >= omega_max:
        raise BandLimit("drive at %.3e rad/s exceeds the lattice band edge "
                        "%.3e rad/s" % (frequency, omega_max))
    if frequency <= 0.0:
        raise ValueError("drive frequency must be positive")
    if not 0 <= node < array.n_cells:
        raise ValueError("drive node %d outside the line" % node)
    return SineDrive(node=node, amplitude=amplitude, frequency=frequency)


class _Scales:
    """Nondimensionalization constants shared by the stepping routines."""

    def __init__(self, array, squid, constants):
        self.l_ref = circuit.josephson_inductance(squid, 0.0, constants=constants)
        self.t_ref = 1.0 / circuit.effective_plasma_frequency(squid, 0.0, constants)
        self.cap = array.ground_capacitance
        self.cell_time = np.sqrt(self.l_ref * self.cap)
        self.chi = (self.t_ref / self.cell_time) ** 2
        # momentum: q_physical = q_scaled * l_ref * cap / t_ref
        self.momentum_unit = self.l_ref * self.cap / self.t_ref


def run(initial: LatticeState, array: circuit.ArrayParams,
        squid: circuit.SquidParams, pulse: bias.FluxPulse,
        config: SolverConfig, drive: Optional[SineDrive] = None,
        probe_nodes: Sequence[int] = (),
        constants: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeTrajectory:
    """Integrate the line under the given bias and return the recording.

    Raises CourantViolation when the configured dt exceeds the stability
    budget, and NonFinite when the state overflows mid-run.
    """
    n = array.n_cells
    if initial.n_cells != n:
        raise ValueError("initial state has %d cells, array has %d"
                         % (initial.n_cells, n))
    if config.boundary == "driven" and drive is None:
        raise ValueError("driven boundary needs a SineDrive")

    scales = _Scales(array, squid, constants)
    a = array.cell_length
    l_min = _minimum_inductance(squid, pulse, constants)
    budget = config.courant_fraction * np.sqrt(l_min * scales.cap)
    dt = budget if config.dt is None else config.dt
    if dt > budget * (1.0 + 1e-12):
        raise CourantViolation("dt = %.3e s exceeds %.3g * sqrt(L_min C0) "
                               "= %.3e s" % (dt, config.courant_fraction, budget))
    dtau = dt / scales.t_ref
    chi = scales.chi

    positions = (np.arange(n) + 0.5) * a
    static_bias = pulse.velocity == 0.0 and pulse.broadening == 0.0
    ics_scale = 2.0 * squid.junction.critical_current

    def inductance(t):
        frac = bias.flux_fraction_at(pulse, positions, t)
        return 1.0 / np.cos(np.pi * frac), frac

    ind_static, frac_static = inductance(0.0) if static_bias else (None, None)

    pot = initial.potential.astype(float).copy()
    mom = initial.momentum.astype(float) / scales.momentum_unit
    t = initial.time
    if not (np.isfinite(pot).all() and np.isfinite(mom).all()):
        raise NonFinite("initial state is not finite")

    steps = config.n_steps
    cadence = config.record_every if config.record_every > 0 else steps
    record_steps = sorted(set(range(0, steps, cadence)) | {steps})
    n_rec = len(record_steps)

    rec_times = np.empty(n_rec)
    rec_pot = np.empty((n_rec, n))
    rec_cur = np.empty((n_rec, n))
    rec_energy = np.empty(n_rec)
    rec_density = np.empty((n_rec, n))

    probe_nodes = tuple(int(p) for p in probe_nodes)
    probe_idx = np.array(probe_nodes, dtype=int)
    probe_vals = np.empty((steps + 1, len(probe_nodes)))
    probe_times = initial.time + np.arange(steps + 1) * dt

    cap = scales.cap
    e_kin_unit = cap / chi
    mom_unit = scales.momentum_unit

    def record(slot, lap, ind_now):
        # Product-form energy: q^- q^+ / (2L) is exactly conserved for a
        # static bias, so the recorded drift measures only roundoff.
        mom_next = mom + dtau * chi * lap
        kin = e_kin_unit * mom * mom_next / (2.0 * ind_now)
        d = np.diff(pot)
        bond = 0.5 * cap * d * d
        density = kin.copy()
        density[:-1] += 0.5 * bond
        density[1:] += 0.5 * bond
        rec_times[slot] = t
        rec_pot[slot] = pot
        rec_cur[slot] = -(cap / scales.t_ref) * 0.5 * (mom + mom_next) / ind_now
        rec_energy[slot] = kin.sum() + bond.sum()
        rec_density[slot] = density

    mur = config.boundary == "absorbing"
    driven = config.boundary == "driven"
    if driven:
        drive_phase_old = np.sin(drive.frequency * t)

    slot = 0
    next_record = record_steps[slot]
    for m in range(steps):
        lap = _laplacian(pot)
        if m == next_record:
            ind_now = ind_static if static_bias else inductance(t)[0]
            record(slot, lap, ind_now)
            slot += 1
            next_record = record_steps[slot]
        if probe_nodes:
            probe_vals[m] = pot[probe_idx]

        mom += dtau * chi * lap
        t_half = t + 0.5 * dt
        if static_bias:
            ind_half, frac_half = ind_static, frac_static
        else:
            ind_half, frac_half = inductance(t_half)

        if config.current_dependent_inductance:
            current = (cap / scales.t_ref) * mom / ind_half
            rel = np.abs(current) / (ics_scale * np.cos(np.pi * frac_half))
            peak = float(rel.max())
            if peak >= 1.0:
                raise OverCritical("cell current reached %.3f of critical"
                                   % peak)
            stretch = np.ones_like(rel)
            big = rel > 1e-6
            stretch[big] = np.arcsin(rel[big]) / rel[big]
            small = ~big
            stretch[small] = 1.0 + rel[small] * rel[small] / 6.0
            ind_half = ind_half * stretch

        if mur or driven:
            left_old = (pot[0], pot[1])
            right_old = (pot[-2], pot[-1])

        pot += dtau * mom / ind_half

        if mur:
            kappa = dtau * np.sqrt(chi / ind_half[0])
            beta = (kappa - 1.0) / (kappa + 1.0)
            pot[0] = left_old[1] + beta * (pot[1] - left_old[0])
        if mur or driven:
            kappa = dtau * np.sqrt(chi / ind_half[-1])
            beta = (kappa - 1.0) / (kappa + 1.0)
            pot[-1] = right_old[0] + beta * (pot[-2] - right_old[1])
        if driven:
            phase = np.sin(drive.frequency * (t + dt))
            pot[drive.node] += drive.amplitude * (phase - drive_phase_old)
            drive_phase_old = phase

        t = initial.time + (m + 1) * dt
        if (m + 1) % config.check_every == 0 and not np.isfinite(pot).all():
            raise NonFinite("state overflowed at step %d" % (m + 1))

    ind_now = ind_static if static_bias else inductance(t)[0]
    record(slot, _laplacian(pot), ind_now)
    if probe_nodes:
        probe_vals[steps] = pot[probe_idx]
    if not (np.isfinite(pot).all() and np.isfinite(mom).all()):
        raise NonFinite("state overflowed during the run")

    final = LatticeState(time=t, potential=pot.copy(),
                         momentum=mom * mom_unit)
    return LatticeTrajectory(
        times=rec_times, potentials=rec_pot, currents=rec_cur,
        energies=rec_energy, energy_density=rec_density,
        positions=positions, probe_nodes=probe_nodes,
        probe_times=probe_times, probe_values=probe_vals,
        final_state=final)


def step(state: LatticeState, array: circuit.ArrayParams,
         squid: circuit.SquidParams, pulse: bias.FluxPulse, dt: float,
         constants: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeState:
    """One leapfrog update with free (reflecting) ends."""
    config = SolverConfig(n_steps=1, dt=dt, courant_fraction=0.5)
    traj = run(state, array, squid, pulse, config, constants=constants)
    return traj.final_state


def gaussian_packet(array: circuit.ArrayParams, squid: circuit.SquidParams,
                    pulse: bias.FluxPulse, center: float, sigma: float,
                    carrier_ka: float, amplitude: float, dt: float,
                    direction: int = 1,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeState:
    """One-way Gaussian wavepacket as an exact discrete solution.

    Builds the potential from a one-sided spectrum and back-steps each mode
    with the discrete dispersion of the leapfrog scheme at the given dt, so
    the counter-propagating remnant is at roundoff level.  The bias must be
    uniform over the packet support, and dt must match the run that will
    evolve the state.
    """
    n = array.n_cells
    a = array.cell_length
    x = (np.arange(n) + 0.5) * a
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")

    frac = float(np.atleast_1d(bias.flux_fraction_at(pulse, center, 0.0))[0])
    ind = circuit.josephson_inductance(squid, frac * constants.flux_quantum,
                                       constants=constants)
    cell_time = np.sqrt(ind * array.ground_capacitance)
    # The zone-edge mode needs sin(w dt/2) = dt/cell_time <= 1 to stay real.
    if dt > cell_time:
        raise CourantViolation("dt = %.3e s unstable for the packet region"
                               % dt)

    envelope = amplitude * np.exp(-0.5 * ((x - center) / sigma) ** 2)
    field = envelope * np.cos(carrier_ka * (x - center) / a)

    spectrum = np.fft.fft(field)
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=a)
    one_sided = np.zeros_like(spectrum)
    half = n // 2
    one_sided[1:half] = 2.0 * spectrum[1:half]
    one_sided[0] = spectrum[0]

    # Exact discrete frequency: sin(w dt/2) = (dt / sqrt(L C0)) sin(|k| a/2).
    arg = (dt / cell_time) * np.abs(np.sin(0.5 * k * a))
    omega_hat = (2.0 / dt) * np.arcsin(arg)

    now = np.fft.ifft(one_sided).real
    before = np.fft.ifft(one_sided * np.exp(1j * direction * omega_hat * dt)).real

    scales = _Scales(array, squid, constants)
    ind_scaled = ind / scales.l_ref
    dtau = dt / scales.t_ref
    momentum = ind_scaled * (now - before) / dtau * scales.momentum_unit
    return LatticeState(time=0.0, potential=now, momentum=momentum)


def measure_pulse_speed(trajectory: LatticeTrajectory,
                        localization_threshold: float = 0.25) -> float:
    """Signed packet velocity from a linear fit of the energy centroid.

    Raises NoPacket when the recorded energy is absent or not localized
    (participation ratio above the threshold).
    """
    density = trajectory.energy_density
    totals = density.sum(axis=1)
    peak = totals.max(initial=0.0)
    if peak <= 0.0:
        raise NoPacket("trajectory carries no energy")
    keep = totals > 1e-12 * peak
    if keep.sum() < 2:
        raise NoPacket("fewer than two usable records")

    density = density[keep]
    totals = totals[keep]
    times = trajectory.times[keep]
    n = density.shape[1]
    participation = totals ** 2 / (n * (density ** 2).sum(axis=1))
    worst = float(participation.max())
    if worst > localization_threshold:
        raise NoPacket("energy not localized (participation ratio %.3f)"
                       % worst)

    centroids = density @ trajectory.positions / totals
    slope = np.polyfit(times, centroids, 1)[0]
    return float(slope)


def write_trajectory_csv(path, trajectory: LatticeTrajectory) -> None:
    """Row-per-node dump with columns t, node, A, I, V."""
    with open(path, "w", newline="") as fh:
        fh.write("t,node,A,I,V\n")
        for r in range(len(trajectory.times)):
            t = trajectory.times[r]
            volts = np.diff(trajectory.potentials[r], prepend=0.0)
            for node in range(trajectory.potentials.shape[1]):
                fh.write("%.12e,%d,%.12e,%.12e,%.12e\n" % (
                    t, node, trajectory.potentials[r, node],
                    trajectory.currents[r, node], volts[node]))


def write_trajectory_binary(path, trajectory: LatticeTrajectory) -> None:
    """Columnar little-endian dump: header, times, then A, I, V blocks."""
    n_rec, n = trajectory.potentials.shape
    volts = np.diff(trajectory.potentials, axis=1, prepend=0.0)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<5sII", _BINARY_MAGIC, n, n_rec))
        fh.write(np.ascontiguousarray(trajectory.times, dtype="<f8").tobytes())
        for block in (trajectory.potentials, trajectory.currents, volts):
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())


def read_trajectory_binary(path):
    """Read a binary dump back as (times, potentials, currents, voltages)."""
    with open(path, "rb") as fh:
        header = fh.read(13)
        if len(header) != 13:
            raise ParseError("truncated header in %s" % path)
        magic, n, n_rec = struct.unpack("<5sII", header)
        if magic != _BINARY_MAGIC:
            raise ParseError("bad magic %r in %s" % (magic, path))
        raw = fh.read()
    expected = n_rec + 3 * n_rec * n
    if len(raw) != 8 * expected:
        raise ParseError("expected %d floats in %s, found %d bytes"
                         % (expected, path, len(raw)))
    payload = np.frombuffer(raw, dtype="<f8")
    times = payload[:n_rec].copy()
    blocks = payload[n_rec:].reshape(3, n_rec, n).copy()
    return times, blocks[0], blocks[1], blocks[2]
