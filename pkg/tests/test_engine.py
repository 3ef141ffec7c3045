import math

import numpy as np
import pytest

from otto_ion.engine import (
    Direction,
    IrreversibilityReference,
    MeasurementPolicy,
    StrokeError,
    StrokeTimes,
    adiabatic_reference_state,
    curzon_ahlborn,
    irr_work_energy,
    irr_work_entropy,
    measurement_cost,
    otto_efficiency,
    pairwise_efficiency,
    run_cycle,
    run_cycles,
    stroke_heating,
    stroke_measurement,
    stroke_ramp,
    thermal_reference,
)
from otto_ion.integrator import StepPolicy
from otto_ion.model import EngineParams, bath_steady_state, effective_temperature, h_system, initial_joint_state
from otto_ion.qcore import ID2, PROJ_MINUS, PROJ_PLUS, SIGMA_Z, gibbs_state, partial_trace, tensor_product

from . import oracles

P = EngineParams()
VAC = np.diag([1.0, 0.0]).astype(complex)
T_LOW = effective_temperature(P.n_cold, P.omega)


class TestHeating:
    def test_matches_exponential_oracle(self):
        rho0 = initial_joint_state(P)
        rec = stroke_heating(rho0, P, 30.0)
        ref = oracles.propagate_constant(rho0, P.B_high, P, 30.0)
        np.testing.assert_allclose(rec.end_state_joint, ref, atol=1e-9)
        q = oracles.energy(oracles.electronic(ref), P.B_high, P.g) - oracles.energy(PROJ_MINUS, P.B_high, P.g)
        assert rec.q == pytest.approx(q, abs=1e-9)
        assert rec.w == 0.0

    def test_plateau_against_oracle(self):
        rho0 = initial_joint_state(P)
        q = {}
        for t in (80.0, 100.0):
            ref = oracles.propagate_constant(rho0, P.B_high, P, t)
            q[t] = oracles.energy(oracles.electronic(ref), P.B_high, P.g) + P.B_high
        assert stroke_heating(rho0, P, 100.0).q == pytest.approx(q[100.0], abs=1e-9)
        assert q[100.0] - q[80.0] < 0.01 * q[100.0]

    def test_no_dynamics_from_eigenstate(self):
        p = EngineParams(gamma=0.0, g=0.0, k=0.0)
        for t in (1.0, 10.0, 50.0):
            assert stroke_heating(initial_joint_state(p), p, t).q == 0.0

    def test_nondecreasing_early(self):
        rho0 = initial_joint_state(P)
        qs = [stroke_heating(rho0, P, t).q for t in (5.0, 10.0, 20.0, 40.0)]
        assert all(b >= a for a, b in zip(qs, qs[1:]))


class TestAdiabaticReference:
    def test_ground_follows(self):
        start = gibbs_state(h_system(P.B_low, P), 0, zero_temperature=True)
        got = adiabatic_reference_state(start, P.B_low, P.B_high, P)
        want = gibbs_state(h_system(P.B_high, P), 0, zero_temperature=True)
        np.testing.assert_allclose(got, want, atol=1e-14)

    def test_gibbs_rescales_temperature(self):
        start = gibbs_state(h_system(P.B_high, P), P.T_hot)
        got = adiabatic_reference_state(start, P.B_high, P.B_low, P)
        t_new = P.T_hot * math.sqrt(P.g**2 + P.B_low**2) / math.sqrt(P.g**2 + P.B_high**2)
        np.testing.assert_allclose(got, gibbs_state(h_system(P.B_low, P), t_new), atol=1e-14)

    def test_maximally_mixed(self):
        np.testing.assert_allclose(adiabatic_reference_state(ID2 / 2, 10, 5, P), ID2 / 2, atol=1e-15)


class TestIrreversibleWork:
    def test_energy_zero_for_identical(self):
        h = h_system(5.0, P)
        rho = gibbs_state(h, 3.0)
        assert irr_work_energy(rho, rho, h) == 0.0

    def test_energy_gap(self):
        h = h_system(5.0, P)
        v = np.linalg.eigh(h)[1]
        ground, excited = np.outer(v[:, 0], v[:, 0].conj()), np.outer(v[:, 1], v[:, 1].conj())
        assert irr_work_energy(excited, ground, h) == pytest.approx(2 * math.sqrt(25.04), abs=1e-12)

    def test_entropy_zero_for_reference(self):
        rho = bath_steady_state(5.0, P)
        assert abs(irr_work_entropy(rho, rho, P.T_hot)) < 1e-12

    def test_entropy_commuting_closed_form(self):
        ref = gibbs_state(10.0 * SIGMA_Z, P.T_hot)
        p = oracles.two_level_gibbs_ground(20.0, P.T_hot)
        want = P.T_hot * (0.9 * math.log(0.9 / p) + 0.1 * math.log(0.1 / (1 - p)))
        assert irr_work_entropy(np.diag([0.9, 0.1]), ref, P.T_hot) == pytest.approx(want, abs=1e-13)
        assert want == pytest.approx(0.01845, abs=1e-5)

    @pytest.mark.parametrize("k", [0.0, 0.1])
    def test_expansion_energy_excess_against_unitary_oracle(self, k):
        p = EngineParams(gamma=0.0, k=k)
        rho0 = tensor_product(gibbs_state(h_system(p.B_high, p), p.T_hot), VAC)
        rec = stroke_ramp(rho0, p, Direction.EXPAND, 8.0)
        ref = oracles.propagate_ramp(rho0, p.B_high, p.B_low, p, 8.0)
        adia = adiabatic_reference_state(oracles.electronic(rho0), p.B_high, p.B_low, p)
        want = oracles.energy(oracles.electronic(ref), p.B_low, p.g) - oracles.energy(adia, p.B_low, p.g)
        assert rec.w_ir_energy == pytest.approx(want, rel=1e-4, abs=1e-9)
        if k == 0:
            # pure internal friction only ever adds energy
            assert want > 0

    def test_friction_grows_with_speed(self):
        p = EngineParams(gamma=0.0, k=0.0)
        rho0 = tensor_product(gibbs_state(h_system(p.B_high, p), p.T_hot), VAC)
        excess = [stroke_ramp(rho0, p, Direction.EXPAND, tau).w_ir_energy for tau in (8.0, 2.0, 1.0)]
        assert 0 < excess[0] < excess[1] < excess[2]


class TestRamp:
    def test_open_system_matches_oracle(self):
        heat = stroke_heating(initial_joint_state(P), P, 20.0)
        rec = stroke_ramp(heat.end_state_joint, P, Direction.EXPAND, 8.0)
        ref = oracles.propagate_ramp(heat.end_state_joint, P.B_high, P.B_low, P, 8.0)
        np.testing.assert_allclose(rec.end_state_joint, ref, atol=1e-6)
        assert rec.q == 0.0 and rec.w == rec.delta_u

    def test_quasistatic_closed_form(self):
        # the full-length version runs in the acceptance suite
        p = EngineParams(gamma=0.0, k=0.0)
        rho0 = tensor_product(gibbs_state(h_system(p.B_high, p), p.T_hot), VAC)
        rec = stroke_ramp(rho0, p, Direction.EXPAND, 300.0, StepPolicy(step_size=2e-3))
        pm = oracles.two_level_gibbs_ground(2 * math.hypot(p.g, p.B_high), p.T_hot)
        want = (2 * pm - 1) * (math.hypot(p.g, p.B_high) - math.hypot(p.g, p.B_low))
        assert rec.w == pytest.approx(want, rel=1e-3)

    def test_slow_ramp_small_entropy_production(self):
        heat = stroke_heating(initial_joint_state(P), P, 100.0)
        rec = stroke_ramp(heat.end_state_joint, P, Direction.EXPAND, 256.0)
        assert 0 <= rec.w_ir_entropy < 1e-3

    def test_no_ramp_without_exchange(self):
        p = EngineParams(B_low=10.0, k=0.0)
        rho0 = tensor_product(bath_steady_state(10.0, p), VAC)
        rec = stroke_ramp(rho0, p, Direction.EXPAND, 8.0)
        assert abs(rec.delta_u) < 1e-6
        assert abs(rec.w_ir_energy) < 1e-6 and abs(rec.w_ir_entropy) < 1e-6

    def test_no_ramp_default_coupling(self):
        # ion-phonon exchange moves ~5e-5 of energy even without a sweep
        p = EngineParams(B_low=10.0)
        rec = stroke_ramp(tensor_product(bath_steady_state(10.0, p), VAC), p, Direction.EXPAND, 8.0)
        assert abs(rec.delta_u) < 1e-4
        assert abs(rec.w_ir_entropy) < 1e-6

    def test_reference_choice(self):
        assert np.allclose(thermal_reference(5.0, P, "gibbs"), gibbs_state(h_system(5.0, P), P.T_hot))
        assert np.allclose(thermal_reference(5.0, P), bath_steady_state(5.0, P))
        # no bath, no stationary state
        p = EngineParams(gamma=0.0)
        assert np.allclose(thermal_reference(5.0, p), gibbs_state(h_system(5.0, p), p.T_hot))


class TestMeasurement:
    def test_already_ground(self):
        rec = stroke_measurement(tensor_product(PROJ_MINUS, VAC), P)
        assert rec.q == 0.0 and rec.p_minus == 1.0 and rec.meas_cost == 0.0

    def test_maximally_mixed_costs_landauer_bound(self):
        rec = stroke_measurement(np.eye(4, dtype=complex) / 4, P)
        assert rec.meas_cost == pytest.approx(T_LOW * math.log(2), abs=1e-15)
        assert measurement_cost(0.5, 0.5, T_LOW) == pytest.approx(T_LOW * math.log(2), abs=1e-15)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.3, 0.5, 0.77, 1.0])
    def test_cost_bounded(self, p):
        assert measurement_cost(p, 1 - p, T_LOW) <= T_LOW * math.log(2) + 1e-12

    def test_heat_bounded_by_drive_offset(self):
        # |-> is not the ground state of H_S(B_L) when g != 0
        offset = math.hypot(P.g, P.B_low) - P.B_low
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = a @ a.conj().T
            assert stroke_measurement(rho / np.trace(rho), P).q <= offset + 1e-12
        v = np.linalg.eigh(h_system(P.B_low, P))[1][:, 0]
        ground = tensor_product(np.outer(v, v.conj()), VAC)
        assert stroke_measurement(ground, P).q == pytest.approx(offset, abs=1e-12)

    def test_postselect_keeps_conditional_phonon(self):
        rho = 0.5 * tensor_product(PROJ_MINUS, VAC) + 0.5 * tensor_product(PROJ_PLUS, np.diag([0.0, 1.0]))
        rec = stroke_measurement(rho, P, MeasurementPolicy.POST_SELECT_GROUND)
        np.testing.assert_allclose(rec.end_state_joint, tensor_product(PROJ_MINUS, VAC))
        fb = stroke_measurement(rho, P, MeasurementPolicy.FEEDBACK_PI_PULSE)
        np.testing.assert_allclose(fb.end_state_joint, tensor_product(PROJ_MINUS, np.eye(2) / 2))

    def test_postselect_impossible(self):
        with pytest.raises(StrokeError):
            stroke_measurement(tensor_product(PROJ_PLUS, VAC), P, "postselect")


class TestCycle:
    @pytest.fixture(scope="class")
    @staticmethod
    def cycle():
        return run_cycle(initial_joint_state(P), P, StrokeTimes(30.0, 16.0))

    def test_sign_conventions(self, cycle):
        heat, expand, meas, comp = cycle.strokes
        assert cycle.w_net == expand.w + comp.w
        assert cycle.eta == pytest.approx(cycle.w_net / cycle.q_hot)
        assert cycle.eta_ir == pytest.approx((cycle.w_net - cycle.w_ir_total) / cycle.q_hot)
        assert cycle.eta_m == pytest.approx(cycle.w_net / (cycle.q_hot + cycle.meas_cost))
        assert cycle.q_hot > 0 and expand.w > 0 and comp.w < 0 and cycle.q_low < 0
        assert cycle.cycle_time == 30.0 + 2 * 16.0

    def test_stroke_energies_chain(self, cycle):
        for a, b in zip(cycle.strokes, cycle.strokes[1:]):
            np.testing.assert_allclose(b.start_state_system, a.end_state_system, atol=1e-15)
            assert b.u_start == pytest.approx(a.u_end, abs=1e-14)
        # first law over the cycle: the stroke energies telescope
        total = cycle.q_hot + cycle.w1 + cycle.q_low + cycle.w2
        assert total == pytest.approx(cycle.strokes[-1].u_end - cycle.strokes[0].u_start, abs=1e-12)

    def test_diagnostics(self, cycle):
        assert cycle.max_trace_drift < 1e-8
        assert cycle.min_eigenvalue >= -1e-9
        assert cycle.w_ir_total >= -1e-10
        assert cycle.operational

    def test_state_against_oracle(self, cycle):
        rho = oracles.propagate_constant(initial_joint_state(P), P.B_high, P, 30.0)
        rho = oracles.propagate_ramp(rho, P.B_high, P.B_low, P, 16.0)
        np.testing.assert_allclose(cycle.strokes[1].end_state_joint, rho, atol=1e-6)

    def test_short_heating_not_operational(self):
        rec = run_cycle(initial_joint_state(P), P, StrokeTimes(5.0, 64.0))
        # more work than heat in: the bookkeeping is not that of an engine
        assert not rec.operational and rec.eta > 1

    def test_gibbs_reference_runs(self):
        rec = run_cycle(initial_joint_state(P), P, StrokeTimes(30.0, 16.0), reference=IrreversibilityReference.GIBBS)
        assert rec.w_ir_total >= -1e-10


class TestMultiCycle:
    def test_single_cycle_has_no_pairs(self):
        rep = run_cycles(1, P, StrokeTimes(10.0, 4.0))
        assert len(rep.cycles) == 1
        assert math.isnan(rep.eta_avg_pairwise[0]) and math.isnan(rep.power[0])

    def test_pairwise_formula_and_chaining(self):
        times = StrokeTimes(25.0, 11.0)
        rep = run_cycles(3, P, times)
        c1, c2, c3 = rep.cycles
        want = ((c3.w_net + c2.w_net) - (c3.w_ir_total + c2.w_ir_total)) / (c3.q_hot + c2.q_hot)
        assert rep.eta_avg_pairwise[2] == pytest.approx(want, rel=1e-14)
        assert rep.power[2] == pytest.approx(want / times.cycle_time, rel=1e-14)
        assert pairwise_efficiency(c2, c1) == rep.eta_avg_pairwise[1]
        again = run_cycle(c1.end_state_joint, P, times, MeasurementPolicy.FEEDBACK_PI_PULSE)
        assert again.q_hot == c2.q_hot

    def test_rejects_zero_cycles(self):
        with pytest.raises(ValueError):
            run_cycles(0, P, StrokeTimes(1.0, 1.0))


class TestBenchmarks:
    def test_otto(self):
        assert otto_efficiency(P) == 0.5

    def test_curzon_ahlborn(self):
        assert curzon_ahlborn(P) == pytest.approx(1 - math.sqrt(0.5), abs=1e-15)
        assert curzon_ahlborn(P) == pytest.approx(0.2929, abs=1e-4)

    def test_no_ramp(self):
        assert curzon_ahlborn(EngineParams(B_low=10.0)) == 0.0

    def test_low_field_limit(self):
        assert curzon_ahlborn(EngineParams(B_low=1e-12)) == pytest.approx(1.0, abs=1e-5)


def test_stroke_times_validation():
    with pytest.raises(ValueError):
        StrokeTimes(0.0, 1.0)


def test_partial_trace_of_cycle_end_is_ground():
    rec = stroke_measurement(np.eye(4, dtype=complex) / 4, P, MeasurementPolicy.FEEDBACK_PI_PULSE)
    np.testing.assert_allclose(partial_trace(rec.end_state_joint, "electronic"), PROJ_MINUS)
