"""Two-team zero-sum games: Boolean phenotypes coupled through a 2x2 kernel.

The kernel entry ``a`` is team A's payoff when both phenotype outputs are 1,
``b`` when A outputs 1 and B outputs 0, ``c`` for (0, 1) and ``d`` for (0, 0);
output 1 maps to the first row/column.  Team B's payoff is always the
negation.  Only kernels with a unique fully mixed equilibrium are accepted:
``min(a, d) > max(b, c)`` or ``max(a, d) < min(b, c)``, which also forces
``alpha = a - b - c + d != 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolfn import BooleanFunction, _expectation, _marginals, _stats
from .errors import InputError


@dataclass(frozen=True)
class PayoffKernel:
    """2x2 zero-sum payoff matrix to team A, with its mixed equilibrium."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        entries = (self.a, self.b, self.c, self.d)
        if not all(np.isfinite(entries)):
            raise InputError(f"kernel entries must be finite, got {entries}")
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.alpha == 0.0:
            raise InputError("degenerate kernel: a - b - c + d must be nonzero")
        if not (
            min(self.a, self.d) > max(self.b, self.c)
            or max(self.a, self.d) < min(self.b, self.c)
        ):
            raise InputError(
                "dominance-solvable kernel: need min(a,d) > max(b,c) "
                "or max(a,d) < min(b,c) for a unique fully mixed equilibrium"
            )

    @property
    def alpha(self) -> float:
        return self.a - self.b - self.c + self.d

    @property
    def p(self) -> float:
        """Equilibrium probability that team A's output is 1."""
        return (self.d - self.c) / self.alpha

    @property
    def q(self) -> float:
        """Equilibrium probability that team B's output is 1."""
        return (self.d - self.b) / self.alpha

    @property
    def value(self) -> float:
        """Team A's expected payoff at the mixed equilibrium."""
        p, q = self.p, self.q
        return (
            p * q * self.a
            + p * (1.0 - q) * self.b
            + (1.0 - p) * q * self.c
            + (1.0 - p) * (1.0 - q) * self.d
        )

    def payoff(self, out_a: int, out_b: int) -> float:
        """Team A's payoff for phenotype outputs ``out_a``, ``out_b`` in {0, 1}."""
        if out_a:
            return self.a if out_b else self.b
        return self.c if out_b else self.d

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])


def validate_kernel(a, b, c, d) -> PayoffKernel:
    """Accept the four entries iff they define a unique fully mixed equilibrium."""
    return PayoffKernel(a, b, c, d)


@dataclass(frozen=True)
class TeamGame:
    """Pair of Boolean phenotypes plus the 2x2 kernel they compete through."""

    f: BooleanFunction
    g: BooleanFunction
    kernel: PayoffKernel

    @property
    def n(self) -> int:
        return self.f.arity

    @property
    def m(self) -> int:
        return self.g.arity

    @property
    def nash_p(self) -> float:
        return self.kernel.p

    @property
    def nash_q(self) -> float:
        return self.kernel.q

    @property
    def value(self) -> float:
        return self.kernel.value

    def describe(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "kernel": [self.kernel.a, self.kernel.b, self.kernel.c, self.kernel.d],
            "alpha": self.kernel.alpha,
            "nash_p": self.nash_p,
            "nash_q": self.nash_q,
            "value": self.value,
        }


def pure_utility(game: TeamGame, s, sigma) -> float:
    """Team A's payoff on a pure profile pair; team B's is its negation."""
    return game.kernel.payoff(game.f.evaluate(s), game.g.evaluate(sigma))


def expected_team_utility(game: TeamGame, x, y) -> float:
    """Team A's expected payoff: (f, 1-f) U (g, 1-g)^T with expected outputs f, g."""
    f = _expectation(game.f, _marginals(x, game.n))
    g = _expectation(game.g, _marginals(y, game.m))
    k = game.kernel
    return (
        f * g * k.a
        + f * (1.0 - g) * k.b
        + (1.0 - f) * g * k.c
        + (1.0 - f) * (1.0 - g) * k.d
    )


def conditional_agent_utilities(game: TeamGame, x, y, team: str, agent: int):
    """Agent's expected utility with its allele clamped to 0 and to 1.

    Returns ``(u0, u1)`` in the agent's own sign convention: team A agents
    receive the kernel payoff, team B agents its negation.
    """
    xv = _marginals(x, game.n)
    yv = _marginals(y, game.m)
    k = game.kernel
    if team == "A":
        if not 0 <= agent < game.n:
            raise InputError(f"agent {agent} out of range for team A of size {game.n}")
        _, f0, f1 = _stats(game.f, xv)
        g = _expectation(game.g, yv)
        hi = g * k.a + (1.0 - g) * k.b
        lo = g * k.c + (1.0 - g) * k.d
        return (
            float(f0[agent] * hi + (1.0 - f0[agent]) * lo),
            float(f1[agent] * hi + (1.0 - f1[agent]) * lo),
        )
    if team == "B":
        if not 0 <= agent < game.m:
            raise InputError(f"agent {agent} out of range for team B of size {game.m}")
        _, g0, g1 = _stats(game.g, yv)
        f = _expectation(game.f, xv)

        def team_a_payoff(gz: float) -> float:
            return f * (gz * k.a + (1.0 - gz) * k.b) + (1.0 - f) * (
                gz * k.c + (1.0 - gz) * k.d
            )

        return (
            -team_a_payoff(float(g0[agent])),
            -team_a_payoff(float(g1[agent])),
        )
    raise InputError(f"team must be 'A' or 'B', got {team!r}")
