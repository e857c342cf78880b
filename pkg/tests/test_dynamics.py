"""Vector fields, integrators, and trajectory recording."""

import io

import numpy as np
import pytest

from teamrep import (
    BooleanFunction,
    IntegratorConfig,
    IntegrationError,
    InputError,
    PayoffKernel,
    TeamGame,
    Trajectory,
    expectation,
    integrate,
    integrate_subsystem,
    make_builtin,
    raw_field,
    rescaled_field,
    subsystem_field,
)
from teamrep.analysis import output_rate
from teamrep.boolfn import batch_stats
from teamrep.dynamics import adaptive_steps, rk4_steps


Z0_FIG1A = np.array([0.65, 0.66, 0.3, 0.75])


class TestRescaledField:
    def test_frozen_first_coordinate(self, xor_xor_mp):
        field = rescaled_field(xor_xor_mp, Z0_FIG1A)
        # 0.65*0.35*(0.34-0.66)*(0.6-0.5)
        assert field[0] == pytest.approx(-0.00728, abs=1e-12)

    def test_pure_states_are_exactly_fixed(self, xor_xor_mp):
        for z in ([0, 0, 0, 0], [1, 1, 0, 1], [1, 0, 1, 0]):
            field = rescaled_field(xor_xor_mp, np.array(z, dtype=float))
            assert np.all(field == 0.0)

    def test_pure_coordinate_has_zero_derivative(self, xor_xor_mp):
        field = rescaled_field(xor_xor_mp, np.array([1.0, 0.3, 0.6, 0.25]))
        assert field[0] == 0.0

    def test_nash_output_state_is_fixed(self, xor_xor_mp):
        # uniform marginals give exactly f = p and g = q
        field = rescaled_field(xor_xor_mp, np.array([0.5, 0.5, 0.5, 0.5]))
        assert np.all(field == 0.0)
        # generic state with both outputs at the equilibrium (up to roundoff)
        field = rescaled_field(xor_xor_mp, np.array([0.5, 0.3, 0.5, 0.8]))
        assert np.max(np.abs(field)) <= 1e-15


class TestRawField:
    def test_proportional_to_rescaled(self, xor_xor_mp):
        rng = np.random.default_rng(21)
        alpha = xor_xor_mp.kernel.alpha
        for _ in range(100):
            z = rng.uniform(0, 1, 4)
            np.testing.assert_allclose(
                raw_field(xor_xor_mp, z), alpha * rescaled_field(xor_xor_mp, z), atol=1e-12
            )

    def test_frozen_value(self, xor_xor_mp):
        assert raw_field(xor_xor_mp, Z0_FIG1A)[0] == pytest.approx(-0.02912, abs=1e-12)

    def test_constant_phenotype_freezes_team(self, matching_pennies):
        const = BooleanFunction(2, np.ones(4, dtype=np.uint8))
        game = TeamGame(const, make_builtin("XOR", 2), matching_pennies)
        field = raw_field(game, np.array([0.4, 0.7, 0.2, 0.9]))
        assert np.all(field[:2] == 0.0)

    def test_proportionality_across_kernels(self):
        rng = np.random.default_rng(22)
        for entries in [(3, 1, 2, 4), (1, 0, 0, 1), (-1, 1, 1, -1)]:
            game = TeamGame(
                make_builtin("OR", 2), make_builtin("AND", 2), PayoffKernel(*entries)
            )
            for _ in range(30):
                z = rng.uniform(0, 1, 4)
                np.testing.assert_allclose(
                    raw_field(game, z),
                    game.kernel.alpha * rescaled_field(game, z),
                    atol=1e-12,
                )


class TestSubsystemField:
    def test_or2_frozen(self):
        field = subsystem_field(make_builtin("OR", 2), [0.5, 0.5])
        np.testing.assert_allclose(field, [-0.125, -0.125], atol=1e-15)

    def test_xor_uniform_is_strange_fixed_point(self):
        field = subsystem_field(make_builtin("XOR", 2), [0.5, 0.5])
        assert np.all(field == 0.0)

    def test_chain_rule_gives_nonnegative_growth(self):
        # df/dt along the subsystem equals the Lyapunov rate, which is >= 0
        rng = np.random.default_rng(23)
        fn = make_builtin("MAJORITY", 3)
        from teamrep.boolfn import conditional_pairs

        for _ in range(50):
            x = rng.uniform(0, 1, 3)
            f0, f1 = conditional_pairs(fn, x)
            dfdt = float(np.dot(f0 - f1, subsystem_field(fn, x)))
            assert dfdt >= 0.0
            assert dfdt == pytest.approx(output_rate(fn, x), rel=1e-12, abs=1e-15)


class TestIntegratorConfig:
    def test_rk4_needs_step(self):
        with pytest.raises(InputError):
            IntegratorConfig(method="rk4")

    def test_unknown_method(self):
        with pytest.raises(InputError):
            IntegratorConfig(method="euler")

    def test_bad_tolerances(self):
        with pytest.raises(InputError):
            IntegratorConfig(abs_tol=0.0)


class TestIntegrate:
    def test_fixed_point_start_stays_constant(self, xor_xor_mp):
        cfg = IntegratorConfig(max_time=5.0, sample_interval=0.5)
        traj = integrate(xor_xor_mp, np.array([1.0, 0.0, 1.0, 1.0]), cfg)
        assert np.all(traj.states == traj.states[0])

    def test_states_stay_in_unit_box(self, or_or_mp):
        cfg = IntegratorConfig(max_time=50.0, sample_interval=0.1)
        traj = integrate(or_or_mp, np.array([0.8, 0.9, 0.3, 0.4]), cfg)
        assert np.all(traj.states >= 0.0)
        assert np.all(traj.states <= 1.0)
        assert traj.metadata["max_boundary_excursion"] <= 1e-9

    def test_sample_times_strictly_increase(self, or_or_mp):
        cfg = IntegratorConfig(max_time=10.0, sample_interval=0.05)
        traj = integrate(or_or_mp, np.array([0.8, 0.9, 0.3, 0.4]), cfg)
        assert np.all(np.diff(traj.times) > 0)

    def test_recorded_scalars_match_states(self, or_or_mp):
        cfg = IntegratorConfig(max_time=10.0, sample_interval=0.1)
        traj = integrate(or_or_mp, np.array([0.8, 0.9, 0.3, 0.4]), cfg)
        for k in range(0, len(traj), 7):
            assert traj.f[k] == pytest.approx(
                expectation(or_or_mp.f, traj.states[k, :2]), abs=1e-12
            )
            assert traj.g[k] == pytest.approx(
                expectation(or_or_mp.g, traj.states[k, 2:]), abs=1e-12
            )

    def test_determinism_bit_identical(self, xor_xor_mp):
        cfg = IntegratorConfig(max_time=20.0, sample_interval=0.1)
        t1 = integrate(xor_xor_mp, Z0_FIG1A, cfg)
        t2 = integrate(xor_xor_mp, Z0_FIG1A, cfg)
        assert np.array_equal(t1.states, t2.states)
        assert np.array_equal(t1.times, t2.times)
        buf1, buf2 = io.StringIO(), io.StringIO()
        t1.write_csv_stream(buf1)
        t2.write_csv_stream(buf2)
        assert buf1.getvalue() == buf2.getvalue()

    def test_raw_field_integration(self, xor_xor_mp):
        # raw time runs alpha times faster; endpoints agree across fields
        cfg_raw = IntegratorConfig(max_time=5.0, sample_interval=0.05)
        cfg_rescaled = IntegratorConfig(max_time=20.0, sample_interval=0.05)
        raw = integrate(xor_xor_mp, Z0_FIG1A, cfg_raw, field_kind="raw")
        scaled = integrate(xor_xor_mp, Z0_FIG1A, cfg_rescaled, field_kind="rescaled")
        np.testing.assert_allclose(raw.states[-1], scaled.states[-1], atol=1e-7)

    def test_fourth_order_convergence(self, xor_xor_mp):
        # halving the fixed step cuts the endpoint error ~16x on one period
        period = 201.4879525701199
        ref_cfg = IntegratorConfig(
            abs_tol=1e-13, rel_tol=1e-13, max_time=period, sample_interval=period
        )
        reference = integrate(xor_xor_mp, Z0_FIG1A, ref_cfg).states[-1]
        errors = []
        for step in (0.08, 0.04):
            cfg = IntegratorConfig(
                method="rk4", step=step, max_time=period, sample_interval=period
            )
            endpoint = integrate(xor_xor_mp, Z0_FIG1A, cfg).states[-1]
            errors.append(float(np.max(np.abs(endpoint - reference))))
        ratio = errors[0] / errors[1]
        assert 10.0 < ratio < 24.0

    def test_step_underflow_raises_with_partial(self):
        def nasty(y):
            # derivative becomes non-finite shortly into the run
            if y[0] > 0.2:
                return np.array([np.nan])
            return np.array([1.0])

        cfg = IntegratorConfig(max_time=10.0, sample_interval=0.01)
        with pytest.raises(IntegrationError):
            list(adaptive_steps(nasty, np.array([0.0]), 10.0, cfg))


class TestSubsystemIntegration:
    def test_forward_output_strictly_increases(self):
        cfg = IntegratorConfig(max_time=5.0, sample_interval=0.05)
        traj = integrate_subsystem(make_builtin("OR", 2), [0.8, 0.9], cfg)
        assert np.all(np.diff(traj.f) > 0)

    def test_backward_output_strictly_decreases(self):
        cfg = IntegratorConfig(max_time=5.0, sample_interval=0.05)
        traj = integrate_subsystem(
            make_builtin("OR", 2), [0.8, 0.9], cfg, direction="backward"
        )
        assert np.all(np.diff(traj.f) < 0)

    def test_forward_limit_is_monotone_toward_one(self):
        cfg = IntegratorConfig(max_time=60.0, sample_interval=0.5)
        traj = integrate_subsystem(make_builtin("OR", 2), [0.8, 0.9], cfg)
        assert traj.f[-1] > 0.999
        assert np.all(np.diff(traj.f) >= 0)

    def test_unknown_direction(self):
        cfg = IntegratorConfig(max_time=1.0, sample_interval=0.1)
        with pytest.raises(InputError):
            integrate_subsystem(make_builtin("OR", 2), [0.5, 0.5], cfg, direction="sideways")


class TestRK4Stepper:
    def test_exact_on_frozen_state(self):
        deriv = lambda y: np.zeros_like(y)  # noqa: E731
        steps = list(rk4_steps(deriv, np.array([0.25, 0.75]), 1.0, 0.1))
        assert all(np.array_equal(s.y1, s.y0) for s in steps)


class TestTrajectoryCSV:
    def test_roundtrip_exact(self, or_or_mp, tmp_path):
        cfg = IntegratorConfig(max_time=3.0, sample_interval=0.1)
        traj = integrate(or_or_mp, np.array([0.8, 0.9, 0.3, 0.4]), cfg)
        path = tmp_path / "traj.csv"
        traj.write_csv(path)
        loaded = Trajectory.read_csv(path)
        assert loaded.n == 2 and loaded.m == 2
        np.testing.assert_array_equal(loaded.states, traj.states)
        np.testing.assert_array_equal(loaded.times, traj.times)
        np.testing.assert_array_equal(loaded.utility, traj.utility)

    def test_header_contract(self, or_or_mp, tmp_path):
        cfg = IntegratorConfig(max_time=1.0, sample_interval=0.5)
        traj = integrate(or_or_mp, np.array([0.8, 0.9, 0.3, 0.4]), cfg)
        path = tmp_path / "traj.csv"
        traj.write_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "t,x_1,x_2,y_1,y_2,f,g,uA"

    def test_malformed_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,a,b\n0,1,2\n")
        with pytest.raises(InputError):
            Trajectory.read_csv(path)


class TestBatchConsistency:
    def test_batch_stats_match_field_inputs(self, xor_xor_mp):
        rng = np.random.default_rng(31)
        xs = rng.uniform(0, 1, size=(25, 2))
        f, f0, f1 = batch_stats(xor_xor_mp.f, xs)
        for k in range(25):
            fk = expectation(xor_xor_mp.f, xs[k])
            assert f[k] == pytest.approx(fk, abs=1e-14)
