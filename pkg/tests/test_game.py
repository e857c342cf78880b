"""Kernel validation, equilibrium formulas, and utility computations."""

import numpy as np
import pytest

from teamrep import (
    BooleanFunction,
    InputError,
    PayoffKernel,
    TeamGame,
    conditional_agent_utilities,
    expectation,
    conditional_pair,
    expected_team_utility,
    make_builtin,
    pure_utility,
    validate_kernel,
)
from teamrep.oracle import brute_conditional_utilities, brute_team_utility


def solve_mixed_equilibrium(a, b, c, d):
    """Independent 2x2 zero-sum solve via the indifference linear systems."""
    # row player's output-1 probability p makes the column player indifferent
    p, _ = np.linalg.solve(np.array([[a - c, 1.0], [b - d, 1.0]]), np.array([0.0, 0.0]) - np.array([c, d]))
    # column player's output-1 probability q makes the row player indifferent
    q, _ = np.linalg.solve(np.array([[a - b, 1.0], [c - d, 1.0]]), np.array([0.0, 0.0]) - np.array([b, d]))
    return float(p), float(q)


class TestKernelValidation:
    def test_matching_pennies(self):
        k = validate_kernel(1, -1, -1, 1)
        assert (k.p, k.q) == (0.5, 0.5)
        assert k.alpha == 4.0

    def test_generic_kernel_against_linear_solve(self):
        k = PayoffKernel(3, 1, 2, 4)
        assert (k.p, k.q) == (0.5, 0.75)
        p_ref, q_ref = solve_mixed_equilibrium(3, 1, 2, 4)
        assert k.p == pytest.approx(p_ref, abs=1e-12)
        assert k.q == pytest.approx(q_ref, abs=1e-12)

    def test_rescaled_matching_pennies(self):
        k = PayoffKernel(1, 0, 0, 1)
        assert (k.p, k.q) == (0.5, 0.5)
        assert k.value == pytest.approx(0.5, abs=0)

    def test_reversed_orientation_accepted(self):
        k = PayoffKernel(-1, 1, 1, -1)  # max(a,d) < min(b,c)
        assert k.alpha == -4.0
        assert (k.p, k.q) == (0.5, 0.5)

    def test_degenerate_alpha_rejected(self):
        with pytest.raises(InputError, match="degenerate"):
            PayoffKernel(2, 1, 1, 0)  # alpha = 0

    def test_dominance_solvable_rejected(self):
        with pytest.raises(InputError, match="dominance"):
            PayoffKernel(2, 1, 0, 0)

    def test_nonfinite_rejected(self):
        with pytest.raises(InputError):
            PayoffKernel(np.inf, 0, 0, 1)

    def test_indifference_identities(self):
        for entries in [(1, -1, -1, 1), (3, 1, 2, 4), (1, 0, 0, 1), (-1, 1, 2, -3)]:
            k = PayoffKernel(*entries)
            a, b, c, d = entries
            # row payoffs equal under the column mix (q, 1-q)
            assert a * k.q + b * (1 - k.q) == pytest.approx(
                c * k.q + d * (1 - k.q), abs=1e-12
            )
            # column losses equal under the row mix (p, 1-p)
            assert a * k.p + c * (1 - k.p) == pytest.approx(
                b * k.p + d * (1 - k.p), abs=1e-12
            )


class TestPureUtility:
    def test_match_profiles(self, xor_xor_mp):
        assert pure_utility(xor_xor_mp, [0, 1], [1, 0]) == 1.0
        assert pure_utility(xor_xor_mp, [0, 0], [1, 0]) == -1.0

    def test_rescaled_kernel_lookup(self, rescaled_kernel):
        game = TeamGame(make_builtin("XOR", 2), make_builtin("XOR", 2), rescaled_kernel)
        assert pure_utility(game, [0, 0], [0, 0]) == 1.0

    def test_zero_sum_is_exact(self, xor_xor_mp):
        for s in range(4):
            for t in range(4):
                bits_s = [(s >> i) & 1 for i in range(2)]
                bits_t = [(t >> j) & 1 for j in range(2)]
                u = pure_utility(xor_xor_mp, bits_s, bits_t)
                assert u + (-u) == 0.0


class TestExpectedTeamUtility:
    def test_value_at_nash_outputs(self, xor_xor_mp):
        # any state with both expected outputs at 1/2 earns the game value 0
        assert expected_team_utility(xor_xor_mp, [0.5, 0.3], [0.5, 0.9]) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_rescaled_value(self, rescaled_kernel):
        game = TeamGame(make_builtin("XOR", 2), make_builtin("XOR", 2), rescaled_kernel)
        assert expected_team_utility(game, [0.5, 0.2], [0.5, 0.8]) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_matches_enumeration(self, xor_xor_mp):
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = rng.uniform(0, 1, 2)
            y = rng.uniform(0, 1, 2)
            assert expected_team_utility(xor_xor_mp, x, y) == pytest.approx(
                brute_team_utility(xor_xor_mp, x, y), abs=1e-12
            )

    def test_factorization_random_games(self):
        rng = np.random.default_rng(12)
        for _ in range(40):
            n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            f = BooleanFunction(n, rng.integers(0, 2, 1 << n).astype(np.uint8))
            g = BooleanFunction(m, rng.integers(0, 2, 1 << m).astype(np.uint8))
            game = TeamGame(f, g, PayoffKernel(3, 1, 2, 4))
            x = rng.uniform(0, 1, n)
            y = rng.uniform(0, 1, m)
            assert expected_team_utility(game, x, y) == pytest.approx(
                brute_team_utility(game, x, y), abs=1e-12
            )


class TestConditionalAgentUtilities:
    def test_matches_enumeration(self, xor_xor_mp):
        x, y = np.array([0.65, 0.66]), np.array([0.3, 0.75])
        for team, size in (("A", 2), ("B", 2)):
            for agent in range(size):
                fast = conditional_agent_utilities(xor_xor_mp, x, y, team, agent)
                slow = brute_conditional_utilities(xor_xor_mp, x, y, team, agent)
                assert fast[0] == pytest.approx(slow[0], abs=1e-12)
                assert fast[1] == pytest.approx(slow[1], abs=1e-12)

    def test_fitness_difference_identity(self, xor_xor_mp):
        # u_i0 - u_i1 = alpha (f_i0 - f_i1)(g - q) for team A agents
        rng = np.random.default_rng(13)
        k = xor_xor_mp.kernel
        for _ in range(30):
            x = rng.uniform(0, 1, 2)
            y = rng.uniform(0, 1, 2)
            for agent in range(2):
                u0, u1 = conditional_agent_utilities(xor_xor_mp, x, y, "A", agent)
                f0, f1 = conditional_pair(xor_xor_mp.f, x, agent)
                g = expectation(xor_xor_mp.g, y)
                assert u0 - u1 == pytest.approx(
                    k.alpha * (f0 - f1) * (g - k.q), abs=1e-12
                )

    def test_equal_conditionals_equal_utilities(self, matching_pennies):
        const = BooleanFunction(2, np.ones(4, dtype=np.uint8))
        game = TeamGame(const, make_builtin("XOR", 2), matching_pennies)
        u0, u1 = conditional_agent_utilities(game, [0.4, 0.7], [0.2, 0.9], "A", 0)
        assert u0 == u1

    def test_team_b_sign_convention(self, xor_xor_mp):
        # mixing the agent's own conditionals reproduces the team average,
        # negated for team B
        x, y = np.array([0.3, 0.8]), np.array([0.6, 0.25])
        team_value = expected_team_utility(xor_xor_mp, x, y)
        u0, u1 = conditional_agent_utilities(xor_xor_mp, x, y, "B", 1)
        mixed = y[1] * u0 + (1 - y[1]) * u1
        assert mixed == pytest.approx(-team_value, abs=1e-12)

    def test_invalid_team_and_index(self, xor_xor_mp):
        with pytest.raises(InputError):
            conditional_agent_utilities(xor_xor_mp, [0.5, 0.5], [0.5, 0.5], "C", 0)
        with pytest.raises(InputError):
            conditional_agent_utilities(xor_xor_mp, [0.5, 0.5], [0.5, 0.5], "A", 5)
