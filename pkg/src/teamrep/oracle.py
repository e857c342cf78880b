"""Independent brute-force references used by tests and the verify command.

Every function here enumerates pure outcomes directly with plain Python
loops: no shared evaluation path with the multilinear/vectorized routines it
cross-checks.  Transparency beats speed; the caps keep runtimes in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolfn import BooleanFunction, _marginals
from .errors import CapacityError, InputError

PROFILE_CAP = 16


def _weight(x, index: int) -> float:
    """Probability of the pure assignment encoded by ``index`` under marginals ``x``."""
    w = 1.0
    for i in range(len(x)):
        bit = (index >> i) & 1
        w *= (1.0 - x[i]) if bit else x[i]
    return w


def brute_expectation(fn: BooleanFunction, x) -> float:
    """Expected output by plain summation over all 2^arity assignments."""
    if fn.arity > PROFILE_CAP:
        raise CapacityError(f"arity {fn.arity} exceeds the enumeration cap {PROFILE_CAP}")
    values = _marginals(x, fn.arity)
    total = 0.0
    for k in range(1 << fn.arity):
        if fn.table[k]:
            total += _weight(values, k)
    return total


def brute_team_utility(game, x, y) -> float:
    """Team A's expected payoff by enumerating every pure profile pair."""
    n, m = game.n, game.m
    if n + m > PROFILE_CAP:
        raise CapacityError(f"n+m = {n + m} exceeds the enumeration cap {PROFILE_CAP}")
    xv = _marginals(x, n)
    yv = _marginals(y, m)
    total = 0.0
    for s in range(1 << n):
        ws = _weight(xv, s)
        fs = int(game.f.table[s])
        for t in range(1 << m):
            total += ws * _weight(yv, t) * game.kernel.payoff(fs, int(game.g.table[t]))
    return total


def brute_conditional_utilities(game, x, y, team: str, agent: int) -> tuple[float, float]:
    """Agent's conditional expected utilities by full profile enumeration.

    Returns ``(u0, u1)``: the agent's own expected payoff with its allele
    clamped to 0 and to 1.  Team B agents receive the negated kernel.
    """
    n, m = game.n, game.m
    if n + m > PROFILE_CAP:
        raise CapacityError(f"n+m = {n + m} exceeds the enumeration cap {PROFILE_CAP}")
    xv = _marginals(x, n)
    yv = _marginals(y, m)
    if team == "A":
        if not 0 <= agent < n:
            raise InputError(f"agent {agent} out of range for team A of size {n}")
    elif team == "B":
        if not 0 <= agent < m:
            raise InputError(f"agent {agent} out of range for team B of size {m}")
    else:
        raise InputError(f"team must be 'A' or 'B', got {team!r}")

    sign = 1.0 if team == "A" else -1.0
    out = []
    for allele in (0, 1):
        total = 0.0
        for s in range(1 << n):
            if team == "A":
                if (s >> agent) & 1 != allele:
                    continue
                ws = _weight_excluding(xv, s, agent)
            else:
                ws = _weight(xv, s)
            fs = int(game.f.table[s])
            for t in range(1 << m):
                if team == "B":
                    if (t >> agent) & 1 != allele:
                        continue
                    wt = _weight_excluding(yv, t, agent)
                else:
                    wt = _weight(yv, t)
                total += ws * wt * game.kernel.payoff(fs, int(game.g.table[t]))
        out.append(sign * total)
    return out[0], out[1]


def _weight_excluding(x, index: int, skip: int) -> float:
    w = 1.0
    for i in range(len(x)):
        if i == skip:
            continue
        bit = (index >> i) & 1
        w *= (1.0 - x[i]) if bit else x[i]
    return w


def reference_integrate(deriv, state0, t_end: float, step: float) -> np.ndarray:
    """Explicit first-order (Euler) endpoint with per-step clamping to [0, 1].

    An intentionally naive scheme, independent of the adaptive integrator it
    cross-checks.
    """
    if step <= 0:
        raise InputError(f"step must be positive, got {step}")
    y = np.asarray(state0, dtype=np.float64).copy()
    t = 0.0
    while t < t_end - 1e-15 * max(1.0, abs(t_end)):
        h = min(step, t_end - t)
        y = y + h * deriv(y)
        np.clip(y, 0.0, 1.0, out=y)
        t += h
    return y


def finite_difference_gradient(fn: BooleanFunction, x, h: float = 1e-6) -> np.ndarray:
    """Central differences of :func:`brute_expectation` per coordinate."""
    if not 0.0 < h <= 1e-3:
        raise InputError(f"step h must be in (0, 1e-3], got {h}")
    values = _marginals(x, fn.arity)
    if np.any(values < h) or np.any(values > 1.0 - h):
        raise InputError("marginals must be interior (at least h away from 0 and 1)")
    grad = np.empty(fn.arity)
    for i in range(fn.arity):
        hi = values.copy()
        lo = values.copy()
        hi[i] += h
        lo[i] -= h
        grad[i] = (brute_expectation(fn, hi) - brute_expectation(fn, lo)) / (2.0 * h)
    return grad


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verification cross-check."""

    name: str
    cases: int
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def _random_function(rng, arity: int) -> BooleanFunction:
    table = rng.integers(0, 2, size=1 << arity).astype(np.uint8)
    if table.max() == 0:
        table[rng.integers(0, table.size)] = 1
    return BooleanFunction(arity, table)


def verification_suite(seed: int = 0, cases: int = 200, rescaled_field_impl=None):
    """Seeded random cross-checks of the fast paths against enumeration.

    ``rescaled_field_impl`` is a test-harness hook: it replaces the rescaled
    field used in the proportionality check so a deliberately broken field is
    caught.  Returns a list of :class:`CheckResult`.
    """
    from . import boolfn, dynamics, game as game_mod

    rng = np.random.default_rng(seed)
    rescaled = rescaled_field_impl or dynamics.rescaled_field

    err_expect = 0.0
    err_multilinear = 0.0
    err_gradient = 0.0
    for _ in range(cases):
        arity = int(rng.integers(1, 9))
        fn = _random_function(rng, arity)
        x = rng.uniform(0.05, 0.95, size=arity)
        f = boolfn.expectation(fn, x)
        err_expect = max(err_expect, abs(f - brute_expectation(fn, x)))
        f0, f1 = boolfn.conditional_pairs(fn, x)
        err_multilinear = max(
            err_multilinear, float(np.max(np.abs(x * f0 + (1.0 - x) * f1 - f)))
        )
        grad = finite_difference_gradient(fn, x, h=1e-6)
        err_gradient = max(err_gradient, float(np.max(np.abs(grad - (f0 - f1)))))

    err_utility = 0.0
    err_team = 0.0
    err_prop = 0.0
    err_fitness = 0.0
    kernels = [(1.0, -1.0, -1.0, 1.0), (1.0, 0.0, 0.0, 1.0), (3.0, 1.0, 2.0, 4.0)]
    for case in range(cases):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 5))
        a, b, c, d = kernels[case % len(kernels)]
        g = game_mod.TeamGame(
            _random_function(rng, n),
            _random_function(rng, m),
            game_mod.PayoffKernel(a, b, c, d),
        )
        x = rng.uniform(0.05, 0.95, size=n)
        y = rng.uniform(0.05, 0.95, size=m)
        err_team = max(
            err_team,
            abs(game_mod.expected_team_utility(g, x, y) - brute_team_utility(g, x, y)),
        )
        for team, size in (("A", n), ("B", m)):
            agent = int(rng.integers(0, size))
            fast = game_mod.conditional_agent_utilities(g, x, y, team, agent)
            slow = brute_conditional_utilities(g, x, y, team, agent)
            err_utility = max(err_utility, abs(fast[0] - slow[0]), abs(fast[1] - slow[1]))
        # fitness-difference identity: u_i0 - u_i1 = alpha (f_i0 - f_i1)(gbar - q)
        agent = int(rng.integers(0, n))
        u0, u1 = brute_conditional_utilities(g, x, y, "A", agent)
        f0, f1 = boolfn.conditional_pair(g.f, x, agent)
        gbar = boolfn.expectation(g.g, y)
        err_fitness = max(
            err_fitness,
            abs((u0 - u1) - g.kernel.alpha * (f0 - f1) * (gbar - g.nash_q)),
        )
        z = np.concatenate([x, y])
        raw = dynamics.raw_field(g, z)
        scaled = rescaled(g, z)
        err_prop = max(err_prop, float(np.max(np.abs(raw - g.kernel.alpha * scaled))))

    return [
        CheckResult("expectation-vs-enumeration", cases, err_expect, 1e-12),
        CheckResult("multilinearity-identity", cases, err_multilinear, 1e-12),
        CheckResult("gradient-vs-finite-differences", cases, err_gradient, 1e-6),
        CheckResult("team-utility-vs-enumeration", cases, err_team, 1e-12),
        CheckResult("conditional-utility-vs-enumeration", cases, err_utility, 1e-12),
        CheckResult("fitness-difference-identity", cases, err_fitness, 1e-12),
        CheckResult("raw-field-proportionality", cases, err_prop, 1e-12),
    ]
