import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import squid_horizon as sh
from squid_horizon import errors

K = sh.DEFAULT_CONSTANTS
PHI0 = K.flux_quantum


class TestStaticRelations:
    def test_critical_current_unbiased(self, ref_squid):
        assert sh.squid_critical_current(ref_squid, 0.0) == pytest.approx(4.0e-6, rel=1e-12)

    def test_critical_current_biased(self, ref_squid):
        # 4e-6 * cos(0.2*pi) evaluated independently
        assert sh.squid_critical_current(ref_squid, 0.2 * PHI0) == pytest.approx(
            3.2360679774997897e-06, rel=1e-12)

    @pytest.mark.parametrize("fraction", [0.5, -0.5, 0.7, -1.2])
    def test_critical_current_flux_range(self, ref_squid, fraction):
        with pytest.raises(errors.FluxOutOfRange):
            sh.squid_critical_current(ref_squid, fraction * PHI0)

    def test_critical_current_near_edge_ok(self, ref_squid):
        assert sh.squid_critical_current(ref_squid, 0.4999 * PHI0) > 0.0

    def test_plasma_frequency_reference(self, ref_squid):
        # Capacitance was chosen to put the zero-flux plasma frequency at 1 THz.
        omega = sh.effective_plasma_frequency(ref_squid, 0.0)
        assert omega / (2.0 * math.pi) == pytest.approx(1.0e12, rel=1e-9)

    def test_plasma_frequency_quoted_capacitance(self):
        # The rounded 0.154 fF capacitance still lands within half a percent.
        jj = sh.JunctionParams(critical_current=2.0e-6, capacitance=1.539e-16)
        sq = sh.SquidParams(junction=jj, loop_inductance=1.0e-11)
        omega = sh.effective_plasma_frequency(sq, 0.0)
        assert omega / (2.0 * math.pi) == pytest.approx(1.0e12, rel=5e-3)

    @pytest.mark.parametrize("fraction", [0.0, 0.1, 0.2, 0.3, 0.45])
    def test_plasma_frequency_flux_scaling(self, ref_squid, fraction):
        ratio = (sh.effective_plasma_frequency(ref_squid, fraction * PHI0) /
                 sh.effective_plasma_frequency(ref_squid, 0.0))
        assert ratio == pytest.approx(math.sqrt(math.cos(math.pi * fraction)), rel=1e-12)

    def test_inductance_zero_current(self, ref_squid):
        # Phi_0 / (2*pi*4e-6) = 82.28 pH
        assert sh.josephson_inductance(ref_squid, 0.0) == pytest.approx(
            8.227649461886334e-11, rel=1e-12)

    @pytest.mark.parametrize("fraction", [0.0, 0.15, 0.3, 0.45, -0.3])
    def test_inductance_critical_current_product(self, ref_squid, fraction):
        # L(0, flux) * I_c^s(flux) = Phi_0 / (2*pi) independent of flux
        flux = fraction * PHI0
        product = (sh.josephson_inductance(ref_squid, flux) *
                   sh.squid_critical_current(ref_squid, flux))
        assert product == pytest.approx(PHI0 / (2.0 * math.pi), rel=1e-14)

    def test_inductance_at_critical_bias(self, ref_squid):
        ics = sh.squid_critical_current(ref_squid, 0.0)
        l0 = sh.josephson_inductance(ref_squid, 0.0)
        assert sh.josephson_inductance(ref_squid, 0.0, current=ics) == pytest.approx(
            0.5 * math.pi * l0, rel=1e-12)

    def test_inductance_series_branch_continuous(self, ref_squid):
        ics = sh.squid_critical_current(ref_squid, 0.0)
        below = sh.josephson_inductance(ref_squid, 0.0, current=0.999999e-6 * ics / 1e-6 * 1e-6 * 0.999e-6)
        # straddle the 1e-6 relative-current switch point directly
        lo = sh.josephson_inductance(ref_squid, 0.0, current=0.99e-6 * ics)
        hi = sh.josephson_inductance(ref_squid, 0.0, current=1.01e-6 * ics)
        assert lo == pytest.approx(hi, rel=1e-12)
        assert below > 0.0

    def test_inductance_monotone_in_current(self, ref_squid):
        ics = sh.squid_critical_current(ref_squid, 0.0)
        currents = np.linspace(0.0, ics, 101)
        values = [sh.josephson_inductance(ref_squid, 0.0, current=i) for i in currents]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_over_critical_raises(self, ref_squid):
        ics = sh.squid_critical_current(ref_squid, 0.0)
        with pytest.raises(errors.OverCritical):
            sh.josephson_inductance(ref_squid, 0.0, current=1.0001 * ics)

    def test_cell_velocity_reference(self, ref_array, ref_squid):
        c = sh.cell_velocity(ref_array, ref_squid, 0.0)
        assert c == pytest.approx(3.897778146429868e6, rel=1e-12)
        # two orders of magnitude under light speed, within the target band
        assert K.light_speed / 120.0 <= c <= K.light_speed / 60.0

    def test_junction_energies(self, ref_squid):
        e_j, e_c = sh.junction_energies(ref_squid, 0.0)
        assert e_j == pytest.approx(1.3164239139018133e-21, rel=1e-12)
        assert e_c == pytest.approx(4.1686126372240996e-23, rel=1e-12)
        assert e_j / e_c == pytest.approx(31.58, rel=1e-3)

    @pytest.mark.parametrize("loop_l, expected", [(1.0e-11, 0.0608), (1.0e-9, 6.08)])
    def test_beta_l(self, ref_junction, loop_l, expected):
        sq = sh.SquidParams(junction=ref_junction, loop_inductance=loop_l)
        assert sh.beta_l(sq) == pytest.approx(expected, rel=2e-3)

    def test_resistance_quantum(self):
        assert K.resistance_quantum == pytest.approx(6.45e3, rel=1e-3)

    @pytest.mark.parametrize("c0, expected", [
        (1.0e-16, 0.624),
        (5.0e-17, 0.883),
        (1.0e-17, 1.974),
        (5.0e-18, 2.791),
    ])
    def test_array_impedance_zero_flux(self, ref_squid, c0, expected):
        arr = sh.ArrayParams(n_cells=4800, cell_length=2.5e-7, ground_capacitance=c0)
        ratio = sh.array_impedance(arr, ref_squid, 0.0) / K.resistance_quantum
        assert ratio == pytest.approx(expected, rel=1e-2)

    def test_array_impedance_near_half_quantum(self, ref_array, ref_squid):
        ratio = sh.array_impedance(ref_array, ref_squid, 0.45 * PHI0) / K.resistance_quantum
        assert ratio == pytest.approx(2.23, rel=1e-2)

    @pytest.mark.parametrize("fraction", [0.0, 0.1, 0.25, 0.4, 0.45])
    def test_impedance_flux_invariant(self, ref_array, ref_squid, fraction):
        # Z_A^2 * cos(pi*flux/Phi_0) does not depend on the flux
        z0 = sh.array_impedance(ref_array, ref_squid, 0.0)
        z = sh.array_impedance(ref_array, ref_squid, fraction * PHI0)
        assert z * z * math.cos(math.pi * fraction) == pytest.approx(z0 * z0, rel=1e-12)


class TestValidityReport:
    def test_reference_design_passes(self, ref_array, ref_squid, step_pulse):
        report = sh.validity_report(ref_array, ref_squid, step_pulse,
                                    max_signal_frequency=5.0e10)
        assert report.overall_pass
        names = [c.name for c in report.checks]
        assert names == ["screening", "signal_band", "peak_flux",
                         "impedance", "energy_ratio", "pulse_speed"]

    def test_pass_iff_value_within_threshold(self, ref_array, ref_squid, step_pulse):
        report = sh.validity_report(ref_array, ref_squid, step_pulse,
                                    max_signal_frequency=5.0e10)
        for check in report.checks:
            assert check.passed == (check.value <= check.threshold)
            assert (check.margin >= 0.0) == check.passed

    def test_large_loop_flagged_not_raised(self, ref_junction, ref_array, step_pulse):
        sq = sh.SquidParams(junction=ref_junction, loop_inductance=1.0e-9)
        report = sh.validity_report(ref_array, sq, step_pulse,
                                    max_signal_frequency=5.0e10)
        assert not report["screening"].passed
        assert not report.overall_pass

    def test_small_cell_capacitance_fails_impedance(self, ref_squid, step_pulse):
        arr = sh.ArrayParams(n_cells=4800, cell_length=2.5e-7,
                             ground_capacitance=5.0e-18)
        report = sh.validity_report(arr, ref_squid, step_pulse,
                                    max_signal_frequency=5.0e10)
        assert not report["impedance"].passed

    def test_superluminal_pulse_flagged(self, ref_array, ref_squid):
        c = sh.cell_velocity(ref_array, ref_squid, 0.0)
        pulse = sh.FluxPulse(amplitude=0.2, velocity=1.05 * c, steepness=4.4e5)
        report = sh.validity_report(ref_array, ref_squid, pulse,
                                    max_signal_frequency=5.0e10)
        assert not report["pulse_speed"].passed

    def test_fast_signal_flagged(self, ref_array, ref_squid, step_pulse):
        report = sh.validity_report(ref_array, ref_squid, step_pulse,
                                    max_signal_frequency=1.0e12)
        assert not report["signal_band"].passed


def _full_rhs_reference(squid, drive, flux_ext, delta):
    """Independent right-hand side for solve_ivp cross-checks."""
    jj = squid.junction
    omega_p = math.sqrt(2.0 * math.pi * jj.critical_current /
                        (jj.capacitance * PHI0))
    bl = (2.0 * math.pi * squid.loop_inductance * jj.critical_current / PHI0)

    def rhs(t, y):
        gp, gm, dgp, dgm = y
        ibar = drive(t) / (2.0 * jj.critical_current)
        fbar = 2.0 * math.pi * flux_ext(t) / PHI0
        return [
            dgp,
            dgm,
            omega_p ** 2 * (ibar - math.cos(gm) * math.sin(gp)) - delta * omega_p * dgp,
            omega_p ** 2 * ((fbar - 2.0 * gm) / bl - math.cos(gp) * math.sin(gm)) - delta * omega_p * dgm,
        ]

    return rhs, omega_p


class TestSingleSquidDynamics:
    def test_settles_to_arcsine_fixed_point(self, ref_junction):
        # near-critical damping pulls the phase onto sin(g) = I/(2 I_c)
        jj = sh.JunctionParams(critical_current=2.0e-6,
                               capacitance=1.539339760883361e-16,
                               normal_resistance=1000.0)
        sq = sh.SquidParams(junction=jj, loop_inductance=1.0e-11)
        omega_p = math.sqrt(2.0 * math.pi * jj.critical_current / (jj.capacitance * PHI0))
        dt = 0.02 / omega_p
        drive = 1.0e-6
        traj = sh.single_squid_dynamics(sq, drive, 0.0, sh.SquidState(),
                                        dt=dt, n_steps=5000)
        target = math.asin(drive / (2.0 * jj.critical_current))
        assert traj.common_phase[-1] == pytest.approx(target, abs=1e-6)
        assert abs(traj.circulating_phase[-1]) < 1e-9

        delta = omega_p / (2.0 * math.pi * jj.critical_current * jj.normal_resistance / PHI0)
        rhs, _ = _full_rhs_reference(sq, lambda t: drive, lambda t: 0.0, delta)
        sol = solve_ivp(rhs, (0.0, traj.times[-1]), [0.0, 0.0, 0.0, 0.0],
                        method="RK45", rtol=1e-11, atol=1e-14,
                        t_eval=[traj.times[-1]])
        assert traj.common_phase[-1] == pytest.approx(sol.y[0, -1], abs=1e-8)

    def test_circulating_phase_tracks_slow_flux(self, ref_junction):
        jj = sh.JunctionParams(critical_current=2.0e-6,
                               capacitance=1.539339760883361e-16,
                               normal_resistance=1000.0)
        # loop sized for beta_L = 0.01
        loop = 0.01 * PHI0 / (2.0 * math.pi * jj.critical_current)
        sq = sh.SquidParams(junction=jj, loop_inductance=loop)
        assert sh.beta_l(sq) == pytest.approx(0.01, rel=1e-12)

        omega_p = math.sqrt(2.0 * math.pi * jj.critical_current / (jj.capacitance * PHI0))
        dt = 0.02 / omega_p
        ramp_time = 400.0 / omega_p

        def flux(t):
            frac = min(t / ramp_time, 1.0)
            return 0.3 * PHI0 * frac

        traj = sh.single_squid_dynamics(sq, 0.0, flux, sh.SquidState(),
                                        dt=dt, n_steps=25000)
        target = math.pi * 0.3
        assert traj.circulating_phase[-1] == pytest.approx(target, rel=0.02)

    def test_timestep_guard(self, ref_squid):
        jj = ref_squid.junction
        omega_p = math.sqrt(2.0 * math.pi * jj.critical_current / (jj.capacitance * PHI0))
        with pytest.raises(ValueError):
            sh.single_squid_dynamics(ref_squid, 0.0, 0.0, sh.SquidState(),
                                     dt=0.2 / omega_p, n_steps=10)

    def test_non_finite_detected(self, ref_squid):
        jj = ref_squid.junction
        omega_p = math.sqrt(2.0 * math.pi * jj.critical_current / (jj.capacitance * PHI0))

        def bad_flux(t):
            return math.inf if t > 5.0 / omega_p else 0.0

        with pytest.raises(errors.NonFinite):
            sh.single_squid_dynamics(ref_squid, 0.0, bad_flux, sh.SquidState(),
                                     dt=0.02 / omega_p, n_steps=2000)

    def test_sampled_and_callable_drives_agree(self, ref_squid):
        jj = ref_squid.junction
        omega_p = math.sqrt(2.0 * math.pi * jj.critical_current / (jj.capacitance * PHI0))
        dt = 0.02 / omega_p
        n = 400
        times = np.arange(n + 1) * dt
        drive = 0.5e-6 * np.sin(2.0 * math.pi * times / times[-1])
        a = sh.single_squid_dynamics(ref_squid, drive, 0.0, sh.SquidState(), dt, n)
        b = sh.single_squid_dynamics(
            ref_squid, lambda t: float(np.interp(t, times, drive)), 0.0,
            sh.SquidState(), dt, n)
        np.testing.assert_allclose(a.common_phase, b.common_phase, rtol=0, atol=1e-12)


class TestReducedDynamics:
    @pytest.mark.parametrize("fraction", [0.0, 0.2])
    def test_small_oscillation_frequency(self, ref_squid, fraction):
        flux = fraction * PHI0
        omega = sh.effective_plasma_frequency(ref_squid, flux)
        dt = 0.02 / omega
        traj = sh.reduced_junction_dynamics(ref_squid, 0.0, flux,
                                            initial_phase=1.0e-3, initial_rate=0.0,
                                            dt=dt, n_steps=40000)
        # zero crossings of the phase give the oscillation period
        sign = np.sign(traj.phase)
        idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        crossings = traj.times[idx] - traj.phase[idx] * (
            (traj.times[idx + 1] - traj.times[idx]) /
            (traj.phase[idx + 1] - traj.phase[idx]))
        periods = 2.0 * np.diff(crossings)
        measured = 2.0 * math.pi / periods.mean()
        assert measured == pytest.approx(omega, rel=1e-3)

    def test_energy_drift_bound(self, ref_squid):
        omega = sh.effective_plasma_frequency(ref_squid, 0.0)
        traj = sh.reduced_junction_dynamics(ref_squid, 0.0, 0.0,
                                            initial_phase=1.0e-3, initial_rate=0.0,
                                            dt=0.02 / omega, n_steps=10000)
        assert traj.energy_drift < 1.0e-8

    def test_moderate_amplitude_energy_bounded(self, ref_squid):
        omega = sh.effective_plasma_frequency(ref_squid, 0.0)
        traj = sh.reduced_junction_dynamics(ref_squid, 0.0, 0.0,
                                            initial_phase=0.5, initial_rate=0.0,
                                            dt=0.02 / omega, n_steps=20000)
        spread = np.ptp(traj.energy) / abs(traj.energy[0])
        assert spread < 1.0e-4

    def test_overcritical_drive_runs(self, ref_squid):
        ics = sh.squid_critical_current(ref_squid, 0.0)
        omega = sh.effective_plasma_frequency(ref_squid, 0.0)
        traj = sh.reduced_junction_dynamics(ref_squid, 1.5 * ics, 0.0,
                                            initial_phase=0.0, initial_rate=0.0,
                                            dt=0.02 / omega, n_steps=5000)
        assert traj.is_running
        assert traj.phase[-1] > 4.0 * math.pi

    def test_subcritical_drive_stays_bound(self, ref_squid):
        ics = sh.squid_critical_current(ref_squid, 0.0)
        omega = sh.effective_plasma_frequency(ref_squid, 0.0)
        traj = sh.reduced_junction_dynamics(ref_squid, 0.5 * ics, 0.0,
                                            initial_phase=0.0, initial_rate=0.0,
                                            dt=0.02 / omega, n_steps=5000)
        assert not traj.is_running


def _equilibrium_circulating(flux_fraction, beta, common_phase=0.0):
    gm = math.pi * flux_fraction
    for _ in range(80):
        gm = math.pi * flux_fraction - 0.5 * beta * math.cos(common_phase) * math.sin(gm)
    return gm


class TestModelReduction:
    def test_full_matches_reduced_at_small_screening(self, ref_junction):
        # 20 oscillation periods at beta_L = 0.01, no damping, flux 0.2 Phi_0
        beta = 0.01
        loop = beta * PHI0 / (2.0 * math.pi * ref_junction.critical_current)
        sq = sh.SquidParams(junction=ref_junction, loop_inductance=loop)
        flux = 0.2 * PHI0
        amp = 5.0e-4

        gm0 = _equilibrium_circulating(0.2, beta)
        omega_ps = sh.effective_plasma_frequency(sq, flux)
        omega_p = math.sqrt(2.0 * math.pi * ref_junction.critical_current /
                            (ref_junction.capacitance * PHI0))
        dt = 0.02 / omega_p
        n = int(round(20.0 * 2.0 * math.pi / omega_ps / dt))

        full = sh.single_squid_dynamics(sq, 0.0, flux,
                                        sh.SquidState(common_phase=amp,
                                                      circulating_phase=gm0),
                                        dt=dt, n_steps=n)
        red = sh.reduced_junction_dynamics(sq, 0.0, flux,
                                           initial_phase=amp, initial_rate=0.0,
                                           dt=dt, n_steps=n)
        diff = np.max(np.abs(full.common_phase - red.phase))
        assert diff < 5.0e-4
