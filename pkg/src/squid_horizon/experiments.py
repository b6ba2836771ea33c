"""Bundled studies on the reference device and a parameter sweep engine.

The reproduction commands regenerate the canned reference artifacts (speed
profile, impedance sweep, emission budget, packet trapping) from a
configuration, emitting deterministic CSV and optional SVG.  The sweep
engine evaluates closed-form outputs over a one- or two-axis parameter
grid with per-point failure capture.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bias, circuit, config, geometry, lattice, svgplot
from .config import RunConfig
from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import ConfigError, NoHorizon, SquidHorizonError, UnknownKey

__all__ = [
    "BudgetReport",
    "Fig2Result",
    "Fig3Result",
    "PacketOutcome",
    "SweepResult",
    "SweepSpec",
    "TrappingReport",
    "load_sweep",
    "reproduce_fig2",
    "reproduce_fig3",
    "run_sweep",
    "temperature_budget",
    "wavepacket_trapping",
    "write_sweep_csv",
]

FIG3_CAPACITANCES = (1.0e-16, 5.0e-17, 1.0e-17, 5.0e-18)

# Trapping study geometry, in cells: launch distance from the horizon and
# packet width.  The verdict window is five traversal times d0/c(0).
TRAP_LAUNCH_CELLS = 150
TRAP_SIGMA_CELLS = 20
TRAP_CARRIER_KA = 0.1
TRAP_WINDOW_TRAVERSALS = 5.0


def _prepare(cfg: Optional[RunConfig], out_dir, emit):
    cfg = cfg if cfg is not None else config.default_config()
    out = Path(out_dir) if out_dir is not None else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    emit = tuple(emit) if emit is not None else cfg.output.emit
    return cfg, out, emit


@dataclass(frozen=True)
class Fig2Result:
    """Comoving speed profile summary for the step pulse."""

    plateau_ratio: float
    flow_ratio: float
    horizon_position: float
    horizon_flux_fraction: float
    csv_path: Optional[str]
    svg_path: Optional[str]


def reproduce_fig2(cfg: Optional[RunConfig] = None, out_dir=".",
                   emit=None,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Fig2Result:
    """Speed profile across the moving front with the horizon marked.

    Emits c(xi)/c(0) together with the constant flow line u/c(0); the
    single horizon of the monotone front sits where the two cross.
    """
    cfg, out, emit = _prepare(cfg, out_dir, emit)
    pulse, array, squid = cfg.pulse, cfg.array, cfg.squid
    c0 = circuit.cell_velocity(array, squid,
                               pulse.dc_offset * constants.flux_quantum,
                               0.0, constants)
    span = 15.0 / pulse.steepness
    xi = pulse.front_position + np.linspace(-span, span, 1201)
    profile = geometry.velocity_profile(array, squid, pulse, 0.0,
                                        positions=xi, constants=constants)
    horizons = geometry.find_horizons(profile)
    if len(horizons) != 1:
        raise NoHorizon("expected exactly one horizon, found %d"
                        % len(horizons))
    horizon = horizons[0]
    flux_fraction = float(bias.comoving_flux_fraction(pulse,
                                                      horizon.position, 0.0))
    ratio = profile.speed / c0
    flow_ratio = pulse.velocity / c0
    rel = xi - pulse.front_position

    csv_path = svg_path = None
    if "csv" in emit:
        csv_path = str(out / "fig2_profile.csv")
        with open(csv_path, "w", newline="") as fh:
            fh.write("xi,c_over_c0,u_over_c0\n")
            for i in range(len(rel)):
                fh.write("%.12e,%.12e,%.12e\n" % (rel[i], ratio[i],
                                                  flow_ratio))
    if "svg" in emit:
        svg_path = str(out / "fig2_profile.svg")
        svgplot.line_plot(
            svg_path,
            [(rel, ratio, "c(xi)/c(0)"),
             (rel, np.full_like(rel, flow_ratio), "u/c(0)")],
            title="Speed profile across the moving front",
            xlabel="xi (m)", ylabel="speed / c(0)",
            vlines=[(horizon.position - pulse.front_position, "horizon")])

    return Fig2Result(plateau_ratio=float(ratio[0]), flow_ratio=flow_ratio,
                      horizon_position=horizon.position,
                      horizon_flux_fraction=flux_fraction,
                      csv_path=csv_path, svg_path=svg_path)


@dataclass(frozen=True)
class Fig3Result:
    """Impedance-to-resistance-quantum sweep over flux, one curve per C0."""

    capacitances: tuple
    flux_fractions: np.ndarray
    ratios: np.ndarray
    csv_path: Optional[str]
    svg_path: Optional[str]

    @property
    def intercepts(self) -> tuple:
        return tuple(float(v) for v in self.ratios[:, 0])


def reproduce_fig3(cfg: Optional[RunConfig] = None, out_dir=".",
                   emit=None,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Fig3Result:
    """Z/R_Q versus flux for four ground capacitances at fixed junctions."""
    cfg, out, emit = _prepare(cfg, out_dir, emit)
    fractions = np.linspace(0.0, 0.49, 99)
    r_q = constants.resistance_quantum
    ratios = np.empty((len(FIG3_CAPACITANCES), len(fractions)))
    for i, cap in enumerate(FIG3_CAPACITANCES):
        array = dataclasses.replace(cfg.array, ground_capacitance=cap)
        for j, f in enumerate(fractions):
            z = circuit.array_impedance(array, cfg.squid,
                                        f * constants.flux_quantum, constants)
            ratios[i, j] = z / r_q

    labels = ["%g aF" % (cap * 1e18) for cap in FIG3_CAPACITANCES]
    csv_path = svg_path = None
    if "csv" in emit:
        csv_path = str(out / "fig3_impedance.csv")
        with open(csv_path, "w", newline="") as fh:
            fh.write("flux_fraction," +
                     ",".join("ratio_" + l.replace(" ", "") for l in labels) +
                     "\n")
            for j in range(len(fractions)):
                fh.write("%.12e," % fractions[j] +
                         ",".join("%.12e" % ratios[i, j]
                                  for i in range(len(FIG3_CAPACITANCES))) +
                         "\n")
    if "svg" in emit:
        svg_path = str(out / "fig3_impedance.svg")
        svgplot.line_plot(
            svg_path,
            [(fractions, ratios[i], "C0 = " + labels[i])
             for i in range(len(FIG3_CAPACITANCES))],
            title="Line impedance over the resistance quantum",
            xlabel="flux / flux quantum", ylabel="Z / R_Q")

    return Fig3Result(capacitances=FIG3_CAPACITANCES,
                      flux_fractions=fractions, ratios=ratios,
                      csv_path=csv_path, svg_path=svg_path)


@dataclass(frozen=True)
class BudgetReport:
    """Emission budget of one traversal against the design targets."""

    initial_temperature: float
    temperature_ratio_1000: float
    photon_count: float
    traversal_time: float
    csv_path: Optional[str]
    svg_path: Optional[str]

    @property
    def targets_met(self) -> dict:
        # Design windows: ~121 mK start, 10% drop per 1000 cells, about
        # one photon per traversal.
        return {
            "temperature": abs(self.initial_temperature - 0.121) <= 0.002,
            "decay": abs(self.temperature_ratio_1000 - 0.90) <= 0.01,
            "count": 0.7 <= self.photon_count <= 1.3,
        }


def temperature_budget(cfg: Optional[RunConfig] = None, out_dir=".",
                       emit=None,
                       constants: PhysicalConstants = DEFAULT_CONSTANTS) -> BudgetReport:
    """Temperature history and photon count for the configured pulse."""
    cfg, out, emit = _prepare(cfg, out_dir, emit)
    budget = geometry.photons_per_pulse(cfg.array, cfg.squid, cfg.pulse,
                                        cfg.array.n_cells,
                                        constants=constants)
    t0 = float(budget.temperatures[0])
    t_1000 = 1000.0 * cfg.array.cell_length / cfg.pulse.velocity
    ratio = float(np.interp(t_1000, budget.times, budget.temperatures)) / t0

    csv_path = svg_path = None
    if "csv" in emit:
        csv_path = str(out / "budget_trace.csv")
        geometry.write_horizon_trace(csv_path, budget)
    if "svg" in emit:
        svg_path = str(out / "budget_trace.svg")
        svgplot.line_plot(
            svg_path,
            [(budget.times, budget.temperatures, "T_H (K)")],
            title="Horizon temperature along the traversal",
            xlabel="t (s)", ylabel="T_H (K)")

    return BudgetReport(initial_temperature=t0, temperature_ratio_1000=ratio,
                        photon_count=budget.expected_count,
                        traversal_time=float(budget.times[-1]),
                        csv_path=csv_path, svg_path=svg_path)


@dataclass(frozen=True)
class PacketOutcome:
    """Verdict for one launched packet."""

    name: str
    crossed: bool
    crossing_time: Optional[float]
    final_offset: float

    @property
    def verdict(self) -> str:
        return "crossed" if self.crossed else "trapped"


@dataclass(frozen=True)
class TrappingReport:
    """Both packet verdicts of one trapping scenario."""

    scenario: str
    horizon_offset: Optional[float]
    outcomes: tuple
    csv_path: Optional[str]


def _centroid_offsets(traj: lattice.LatticeTrajectory, flow: float,
                      reference: float) -> np.ndarray:
    density = traj.energy_density
    totals = density.sum(axis=1)
    centroids = (density @ traj.positions) / totals
    return centroids - flow * traj.times - reference


def wavepacket_trapping(cfg: Optional[RunConfig] = None, out_dir=".",
                        emit=None, scenario: str = "pulse",
                        constants: PhysicalConstants = DEFAULT_CONSTANTS) -> TrappingReport:
    """Launch counter-propagating packets around the horizon and classify.

    In the "pulse" scenario a forward packet behind the horizon and a
    backward packet ahead of it are evolved in the lab frame for five
    traversal times; centroids are transformed to the front frame before
    the crossing test.  The "static" scenario repeats the geometry with no
    pulse, where both packets must cross.
    """
    if scenario not in ("pulse", "static"):
        raise ValueError("scenario must be 'pulse' or 'static'")
    cfg, out, emit = _prepare(cfg, out_dir, emit)
    array, squid = cfg.array, cfg.squid
    a = array.cell_length
    center = 0.5 * array.n_cells * a

    if scenario == "pulse":
        pulse = dataclasses.replace(cfg.pulse, front_position=center,
                                    broadening=0.0)
        if pulse.velocity <= 0.0:
            raise ValueError("the pulse scenario needs a moving front")
        span = 30.0 / pulse.steepness
        xi = center + np.linspace(-span, span, 2001)
        profile = geometry.velocity_profile(array, squid, pulse, 0.0,
                                            positions=xi,
                                            constants=constants)
        horizon = geometry.find_horizons(profile)[0]
        reference = horizon.position
    else:
        pulse = bias.FluxPulse(amplitude=0.0, dc_offset=cfg.pulse.dc_offset,
                               velocity=0.0, steepness=cfg.pulse.steepness,
                               front_position=center)
        reference = center

    c0 = circuit.cell_velocity(array, squid,
                               pulse.dc_offset * constants.flux_quantum,
                               0.0, constants)
    d0 = TRAP_LAUNCH_CELLS * a
    sigma = TRAP_SIGMA_CELLS * a
    dt = lattice.stable_timestep(array, squid, pulse, constants=constants)
    window = TRAP_WINDOW_TRAVERSALS * d0 / c0
    n_steps = int(math.ceil(window / dt))
    record_every = max(1, n_steps // 60)
    solver = lattice.SolverConfig(n_steps=n_steps, dt=dt,
                                  boundary="absorbing",
                                  record_every=record_every)

    launches = (("forward_behind", reference - d0, +1),
                ("backward_ahead", reference + d0, -1))
    outcomes = []
    traces = {}
    for name, start, direction in launches:
        state = lattice.gaussian_packet(array, squid, pulse, start, sigma,
                                        TRAP_CARRIER_KA, 1.0e-6, dt,
                                        direction, constants)
        traj = lattice.run(state, array, squid, pulse, solver,
                           constants=constants)
        offsets = _centroid_offsets(traj, pulse.velocity, reference)
        traces[name] = (traj.times, offsets)
        sign = 1.0 if direction > 0 else -1.0
        crossed_mask = sign * offsets > 0.0
        if crossed_mask.any():
            first = int(np.argmax(crossed_mask))
            outcome = PacketOutcome(name=name, crossed=True,
                                    crossing_time=float(traj.times[first]),
                                    final_offset=float(offsets[-1]))
        else:
            outcome = PacketOutcome(name=name, crossed=False,
                                    crossing_time=None,
                                    final_offset=float(offsets[-1]))
        outcomes.append(outcome)

    csv_path = None
    if "csv" in emit:
        csv_path = str(out / ("trapping_%s.csv" % scenario))
        with open(csv_path, "w", newline="") as fh:
            fh.write("packet,t,xi_offset\n")
            for name, (times, offsets) in traces.items():
                for i in range(len(times)):
                    fh.write("%s,%.12e,%.12e\n" % (name, times[i],
                                                   offsets[i]))

    return TrappingReport(
        scenario=scenario,
        horizon_offset=(reference - center if scenario == "pulse" else None),
        outcomes=tuple(outcomes), csv_path=csv_path)


_SWEEP_OUTPUTS = ("hawking_temperature", "impedance_ratio", "cell_speed",
                  "horizon_count", "photon_count")


@dataclass(frozen=True)
class SweepSpec:
    """Grid description: base configuration, up to two axes, outputs."""

    base: RunConfig
    axes: tuple
    outputs: tuple

    def __post_init__(self) -> None:
        if len(self.axes) > 2:
            raise ConfigError("at most two sweep axes are supported")
        for path, values in self.axes:
            config.resolve_path(path)
            if len(values) == 0:
                raise ConfigError("axis %r has no values" % path)
        if not self.outputs:
            raise ConfigError("no outputs requested")
        for name in self.outputs:
            if name not in _SWEEP_OUTPUTS:
                raise ConfigError("unknown output %r; valid outputs: %s"
                                  % (name, ", ".join(_SWEEP_OUTPUTS)))


@dataclass(frozen=True)
class SweepPoint:
    coordinates: tuple
    outputs: dict
    error: Optional[str]


@dataclass(frozen=True)
class SweepResult:
    axis_paths: tuple
    output_names: tuple
    points: tuple


def _evaluate_output(name: str, cfg: RunConfig,
                     constants: PhysicalConstants) -> float:
    flux_dc = cfg.pulse.dc_offset * constants.flux_quantum
    if name == "cell_speed":
        return circuit.cell_velocity(cfg.array, cfg.squid, flux_dc, 0.0,
                                     constants)
    if name == "impedance_ratio":
        z = circuit.array_impedance(cfg.array, cfg.squid, flux_dc, constants)
        return z / constants.resistance_quantum
    if name == "horizon_count":
        profile = geometry.velocity_profile(cfg.array, cfg.squid, cfg.pulse,
                                            0.0, constants=constants)
        return float(len(geometry.find_horizons(profile)))
    if name == "hawking_temperature":
        profile = geometry.velocity_profile(cfg.array, cfg.squid, cfg.pulse,
                                            0.0, constants=constants)
        return geometry.hawking_temperature(profile, constants=constants)
    if name == "photon_count":
        budget = geometry.photons_per_pulse(cfg.array, cfg.squid, cfg.pulse,
                                            cfg.array.n_cells,
                                            constants=constants)
        return budget.expected_count
    raise AssertionError(name)


def _sweep_point(spec: SweepSpec, coords: tuple,
                 constants: PhysicalConstants) -> SweepPoint:
    try:
        cfg = spec.base
        for (path, _), value in zip(spec.axes, coords):
            cfg = config.apply_override(cfg, path, value)
        outputs = {name: _evaluate_output(name, cfg, constants)
                   for name in spec.outputs}
        return SweepPoint(coordinates=coords, outputs=outputs, error=None)
    except (SquidHorizonError, ValueError) as exc:
        return SweepPoint(coordinates=coords, outputs={},
                          error="%s: %s" % (type(exc).__name__, exc))


def run_sweep(spec: SweepSpec, workers: Optional[int] = None,
              constants: PhysicalConstants = DEFAULT_CONSTANTS) -> SweepResult:
    """Evaluate the grid; per-point failures are recorded, not raised.

    Points run on a worker pool but aggregation preserves grid order, so
    the result is independent of the worker count.
    """
    workers = workers if workers is not None else spec.base.output.workers
    grid = list(itertools.product(*[tuple(values)
                                    for _, values in spec.axes]))
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(
                lambda c: _sweep_point(spec, c, constants), grid))
    else:
        points = [_sweep_point(spec, c, constants) for c in grid]
    return SweepResult(axis_paths=tuple(path for path, _ in spec.axes),
                       output_names=tuple(spec.outputs),
                       points=tuple(points))


def write_sweep_csv(path, result: SweepResult) -> None:
    """One row per grid point; failed points keep their error message."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(result.axis_paths) +
                        list(result.output_names) + ["error"])
        for point in result.points:
            row = ["%.12e" % v if isinstance(v, float) else str(v)
                   for v in point.coordinates]
            for name in result.output_names:
                value = point.outputs.get(name)
                row.append("" if value is None else "%.12e" % value)
            row.append(point.error or "")
            writer.writerow(row)


def load_sweep(path) -> SweepSpec:
    """Parse a sweep description file.

    Layout: {"base": <configuration object, optional>, "axes":
    [{"path": "section.key", "values": [...]}], "outputs": [names]}.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise config.ParseError("%s: line %d column %d: %s"
                                % (path, exc.lineno, exc.colno,
                                   exc.msg)) from exc
    if not isinstance(data, dict):
        raise ConfigError("sweep file must hold a JSON object")
    known = {"base", "axes", "outputs"}
    for key in data:
        if key not in known:
            raise UnknownKey("unknown sweep key %r; valid keys: %s"
                             % (key, ", ".join(sorted(known))))
    base_data = data.get("base", {})
    base = config.loads_config(json.dumps(base_data), source=str(path))
    axes = []
    for axis in data.get("axes", []):
        if not isinstance(axis, dict) or set(axis) != {"path", "values"}:
            raise ConfigError("each axis needs exactly 'path' and 'values'")
        if not isinstance(axis["values"], list):
            raise ConfigError("axis values must form a list")
        axes.append((axis["path"], tuple(axis["values"])))
    outputs = data.get("outputs", [])
    if not isinstance(outputs, list):
        raise ConfigError("outputs must form a list")
    return SweepSpec(base=base, axes=tuple(axes), outputs=tuple(outputs))
