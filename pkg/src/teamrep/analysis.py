"""Structural analyses of trajectories: fixed points, periods, the conserved
quantity, time averages, and equilibrium certification.

The conserved quantity is evaluated through each team's rate profile: along
one team's subsystem the expected output z is strictly monotone in time, so
the subsystem trajectory through the initial condition yields a well-defined
rate function

    r(z) = sum_i x_i (1 - x_i) (f_i0 - f_i1)^2      (evaluated at x = X(z))

and the first integral of the reduced planar system is

    H(xi, zeta) = int_p^xi (z - p) / r(z) dz + int_q^zeta (z - q) / w(z) dz.

Rate profiles are interpolated with a monotone cubic (PCHIP) and integrated
by adaptive quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import PchipInterpolator

from .boolfn import BooleanFunction, ProductDistribution, _expectation, _stats, batch_stats
from .dynamics import (
    IntegratorConfig,
    Step,
    SystemState,
    Trajectory,
    effective_alpha,
    field_function,
    rescaled_field,
    step_stream,
    subsystem_field,
)
from .errors import CapacityError, DomainError, InputError
from .game import TeamGame

PROFILE_CAP = 16

FIXED_POINT_KINDS = ("nash", "strange", "partial_nash", "partial_strange", "pure")


def output_rate(fn: BooleanFunction, x) -> float:
    """Lyapunov growth rate sum_i x_i (1 - x_i)(f_i0 - f_i1)^2 at a state."""
    vec = x.values if isinstance(x, ProductDistribution) else np.asarray(x, float)
    _, f0, f1 = _stats(fn, vec)
    return float(np.sum(vec * (1.0 - vec) * (f0 - f1) ** 2))


# ----------------------------------------------------------------------------
# fixed points
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedPointReport:
    """Classification of a candidate stationary state."""

    is_fixed: bool
    kinds: frozenset[str]
    weakly_stable: str  # "yes" | "no" | "not_applicable"
    residual: float

    def as_dict(self) -> dict:
        return {
            "is_fixed": self.is_fixed,
            "kinds": sorted(self.kinds),
            "weakly_stable": self.weakly_stable,
            "residual": self.residual,
        }


def weakly_stable_check(fn: BooleanFunction, x, tol: float = 1e-9) -> str:
    """Weak-stability test of a subsystem fixed point.

    "yes" iff every randomizing agent stays indifferent (equal clamped
    conditionals) after any other randomizing agent deviates to either pure
    allele.  "not_applicable" when the state is not a subsystem fixed point
    or has no randomizing agent.
    """
    vec = ProductDistribution.coerce(x, fn.arity).values
    if float(np.max(np.abs(subsystem_field(fn, vec)))) > tol:
        return "not_applicable"
    randomizing = [i for i in range(fn.arity) if tol < vec[i] < 1.0 - tol]
    if not randomizing:
        return "not_applicable"
    for j in randomizing:
        for allele in (0, 1):
            deviated = vec.copy()
            # playing pure allele 0 means the allele-0 marginal jumps to 1
            deviated[j] = 1.0 if allele == 0 else 0.0
            _, f0, f1 = _stats(fn, deviated)
            for i in randomizing:
                if i == j:
                    continue
                if abs(float(f0[i] - f1[i])) > tol:
                    return "no"
    return "yes"


def classify_fixed_point(game: TeamGame, state, tol: float = 1e-9) -> FixedPointReport:
    """Classify a state as fixed/non-fixed and name the fixed-point kinds.

    Kinds may co-occur.  "nash" needs both expected outputs at the kernel
    equilibrium; "strange" needs one team's randomizing agents all unable to
    move their output; "pure" is a fully deterministic state; the partial
    variants apply the same conditions on the subgame of randomizing agents
    when some agents are pure.
    """
    vec = (
        state.vector
        if isinstance(state, SystemState)
        else SystemState.from_vector(game, state).vector
    )
    residual = float(np.max(np.abs(rescaled_field(game, vec))))
    x, y = vec[: game.n], vec[game.n :]
    f, f0, f1 = _stats(game.f, x)
    g, g0, g1 = _stats(game.g, y)
    rand_a = [i for i in range(game.n) if tol < x[i] < 1.0 - tol]
    rand_b = [j for j in range(game.m) if tol < y[j] < 1.0 - tol]

    is_fixed = residual <= tol
    kinds: set[str] = set()
    if is_fixed:
        nash_cond = abs(f - game.nash_p) <= tol and abs(g - game.nash_q) <= tol
        strange_cond = (
            bool(rand_a) and max(abs(float(f0[i] - f1[i])) for i in rand_a) <= tol
        ) or (bool(rand_b) and max(abs(float(g0[j] - g1[j])) for j in rand_b) <= tol)
        if not rand_a and not rand_b:
            kinds.add("pure")
        elif len(rand_a) == game.n and len(rand_b) == game.m:
            if nash_cond:
                kinds.add("nash")
            if strange_cond:
                kinds.add("strange")
        else:
            if nash_cond:
                kinds.add("partial_nash")
            if strange_cond:
                kinds.add("partial_strange")

    weakly = "not_applicable"
    if is_fixed:
        verdicts = []
        for fn, team_state, randomizing in (
            (game.f, x, rand_a),
            (game.g, y, rand_b),
        ):
            if randomizing and float(np.max(np.abs(subsystem_field(fn, team_state)))) <= tol:
                verdicts.append(weakly_stable_check(fn, team_state, tol))
        verdicts = [v for v in verdicts if v != "not_applicable"]
        if verdicts:
            weakly = "yes" if all(v == "yes" for v in verdicts) else "no"
    return FixedPointReport(
        is_fixed=is_fixed, kinds=frozenset(kinds), weakly_stable=weakly, residual=residual
    )


# ----------------------------------------------------------------------------
# period detection
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodEstimate:
    """Measured recurrence of the full state on the section {f = p, df/dt > 0}."""

    period: float
    return_error: float
    crossings_used: int


def _bisect_crossing(step: Step, value, target: float, time_tol: float) -> float:
    """Root of value(state(t)) - target inside one accepted step, by bisection."""
    lo, hi = step.t0, step.t1
    while hi - lo > time_tol:
        mid = 0.5 * (lo + hi)
        if value(step.interpolate(mid)) - target < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def detect_period(
    game: TeamGame,
    state0,
    config: IntegratorConfig,
    field_kind: str = "rescaled",
    return_tol: float = 1e-6,
    fixed_tol: float = 1e-9,
    time_tol: float = 1e-12,
    monitor=None,
) -> PeriodEstimate | None:
    """Detect a periodic orbit through ``state0``.

    Integrates while watching upward crossings of the section f = nash_p;
    crossing times are located by bisection on the dense output.  Returns the
    estimate as soon as two consecutive crossings agree in every coordinate
    within ``return_tol`` (sup-norm), or None when ``config.max_time`` passes
    without a match.  Starting at a fixed point is an input error.
    """
    z0 = (
        state0.vector
        if isinstance(state0, SystemState)
        else SystemState.from_vector(game, state0).vector
    )
    if float(np.max(np.abs(rescaled_field(game, z0)))) <= fixed_tol:
        raise InputError("initial state is a fixed point; no period to detect")
    deriv = field_function(game, field_kind)
    n = game.n

    def f_of(zvec: np.ndarray) -> float:
        return _expectation(game.f, zvec[:n])

    target = game.nash_p
    crossings: list[tuple[float, np.ndarray]] = []
    c_prev = f_of(z0) - target
    for step in step_stream(deriv, z0, config.max_time, config):
        if monitor is not None:
            monitor(step)
        c_next = f_of(step.y1) - target
        if c_prev < 0.0 <= c_next:
            t_star = _bisect_crossing(step, f_of, target, time_tol)
            state = np.clip(step.interpolate(t_star), 0.0, 1.0)
            crossings.append((t_star, state))
            if len(crossings) >= 2:
                prev_t, prev_state = crossings[-2]
                err = float(np.max(np.abs(state - prev_state)))
                if err <= return_tol:
                    return PeriodEstimate(
                        period=t_star - prev_t,
                        return_error=err,
                        crossings_used=len(crossings),
                    )
        c_prev = c_next
    return None


# ----------------------------------------------------------------------------
# rate profiles and the conserved quantity
# ----------------------------------------------------------------------------


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _gl_batch(fun, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Fixed 12-point Gauss-Legendre integral of ``fun`` over each [a_k, b_k]."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    points = mid[:, None] + half[:, None] * _GL_NODES
    values = fun(points.ravel()).reshape(points.shape)
    return half * (values @ _GL_WEIGHTS)


def _adaptive_segment(fun, a: float, b: float, target: float, depth: int = 0) -> float:
    one = np.array([a]), np.array([b])
    coarse = float(_gl_batch(fun, *one)[0])
    mid = 0.5 * (a + b)
    fine = float(
        _gl_batch(fun, np.array([a]), np.array([mid]))[0]
        + _gl_batch(fun, np.array([mid]), np.array([b]))[0]
    )
    if abs(fine - coarse) <= target or depth >= 24:
        return fine
    half = 0.5 * target
    return _adaptive_segment(fun, a, mid, half, depth + 1) + _adaptive_segment(
        fun, mid, b, half, depth + 1
    )


def _adaptive_intervals(fun, a: np.ndarray, b: np.ndarray, target: float) -> np.ndarray:
    """Adaptive Gauss-Legendre integrals over many intervals, vectorized.

    Each interval is refined by bisection until the coarse/fine estimates
    agree within ``target``.
    """
    coarse = _gl_batch(fun, a, b)
    mid = 0.5 * (a + b)
    fine = _gl_batch(fun, a, mid) + _gl_batch(fun, mid, b)
    out = fine.copy()
    for k in np.nonzero(np.abs(fine - coarse) > target)[0]:
        out[k] = _adaptive_segment(fun, float(a[k]), float(b[k]), target, depth=1)
    return out


class _PotentialTable:
    """Piecewise integral of (z - center)/r(z), cached per knot interval.

    Only the intervals between the center and actual query points are ever
    integrated, so the near-boundary knots (where the rate vanishes and the
    integrand blows up) are never touched by interior queries.
    """

    def __init__(self, profile: "RateProfile", center: float, target: float = 1e-13):
        interp = profile.interpolator
        self.center = center
        self.target = target
        self.fun = lambda z: (z - center) / interp(z)
        self.edges = profile.z
        self._cache: dict[int, float] = {}

    def _segment(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        return float(
            _adaptive_intervals(self.fun, np.array([a]), np.array([b]), self.target)[0]
        )

    def _whole_interval(self, j: int) -> float:
        value = self._cache.get(j)
        if value is None:
            value = self._segment(float(self.edges[j]), float(self.edges[j + 1]))
            self._cache[j] = value
        return value

    def _locate(self, value: float) -> int:
        j = int(np.searchsorted(self.edges, value, side="right")) - 1
        return min(max(j, 0), self.edges.size - 2)

    def potential(self, value: float) -> float:
        lo, hi = sorted((self.center, value))
        sign = 1.0 if value >= self.center else -1.0
        ja, jb = self._locate(lo), self._locate(hi)
        if ja == jb:
            return sign * self._segment(lo, hi)
        total = self._segment(lo, float(self.edges[ja + 1]))
        total += sum(self._whole_interval(j) for j in range(ja + 1, jb))
        total += self._segment(float(self.edges[jb]), hi)
        return sign * total


@dataclass(eq=False)
class RateProfile:
    """Monotone knot sequence (z, r(z)) reconstructed from one subsystem orbit."""

    team: str
    z: np.ndarray
    r: np.ndarray

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.z[0]), float(self.z[-1])

    @cached_property
    def interpolator(self) -> PchipInterpolator:
        return PchipInterpolator(self.z, self.r, extrapolate=False)

    def rate(self, value: float) -> float:
        lo, hi = self.domain
        if not lo <= value <= hi:
            raise DomainError(
                f"query z = {value:.6g} outside reconstructed domain [{lo:.6g}, {hi:.6g}]"
            )
        return float(self.interpolator(value))

    def potential(self, center: float, value: float) -> float:
        """Adaptive-quadrature integral of (z - center)/r(z) from center to value."""
        lo, hi = self.domain
        for point, name in ((center, "center"), (value, "query")):
            if not lo <= point <= hi:
                raise DomainError(
                    f"{name} z = {point:.6g} outside reconstructed domain "
                    f"[{lo:.6g}, {hi:.6g}]"
                )
        if value == center:
            return 0.0
        if not hasattr(self, "_tables"):
            self._tables: dict[float, _PotentialTable] = {}
        table = self._tables.get(center)
        if table is None:
            table = _PotentialTable(self, center)
            self._tables[center] = table
        return table.potential(value)


def rate_profile(
    fn: BooleanFunction,
    x0,
    config: IntegratorConfig,
    team: str = "A",
    fixed_tol: float = 1e-9,
    max_knot_spacing: float = 2e-3,
) -> RateProfile:
    """Reconstruct r(z) along the subsystem orbit through ``x0``.

    The subsystem is integrated forward and backward for ``config.max_time``
    each; accepted steps contribute knots (z, r), subdivided on the dense
    output so consecutive knots are at most ``max_knot_spacing`` apart in z.
    The expected output is strictly monotone along the orbit, so the merged
    knots are strictly increasing in z (ties from saturation are dropped).
    """
    vec = ProductDistribution.coerce(x0, fn.arity).values
    if float(np.max(np.abs(subsystem_field(fn, vec)))) <= fixed_tol:
        raise InputError("subsystem state is already a fixed point; rate profile undefined")

    def knot(state: np.ndarray) -> tuple[float, float]:
        return _expectation(fn, state), output_rate(fn, state)

    def collect(sign: float) -> list[tuple[float, float]]:
        deriv = lambda x: sign * subsystem_field(fn, x)  # noqa: E731
        knots: list[tuple[float, float]] = []
        z_prev = _expectation(fn, vec)
        for step in step_stream(deriv, vec, config.max_time, config):
            z_next = _expectation(fn, np.clip(step.y1, 0.0, 1.0))
            pieces = max(1, int(np.ceil(abs(z_next - z_prev) / max_knot_spacing)))
            for part in range(1, pieces):
                t_mid = step.t0 + (step.t1 - step.t0) * part / pieces
                knots.append(knot(np.clip(step.interpolate(t_mid), 0.0, 1.0)))
            knots.append(knot(np.clip(step.y1, 0.0, 1.0)))
            z_prev = z_next
        return knots

    forward = collect(1.0)
    backward = collect(-1.0)
    knots = list(reversed(backward)) + [knot(vec)] + forward
    zs: list[float] = []
    rs: list[float] = []
    for z, r in knots:
        if not zs or z > zs[-1]:
            zs.append(z)
            rs.append(max(r, 0.0))
    if len(zs) < 4:
        raise InputError("too few distinct knots to build a rate profile")
    return RateProfile(team=team, z=np.asarray(zs), r=np.asarray(rs))


def hamiltonian(
    rate_a: RateProfile,
    rate_b: RateProfile,
    p: float,
    q: float,
    xi: float,
    zeta: float,
) -> float:
    """Constant of the motion H(xi, zeta) from reconstructed rate profiles."""
    return rate_a.potential(p, xi) + rate_b.potential(q, zeta)


def hamiltonian_values(
    rate_a: RateProfile,
    rate_b: RateProfile,
    p: float,
    q: float,
    f_values,
    g_values,
) -> np.ndarray:
    """Vector of H over paired (f, g) samples."""
    f_values = np.asarray(f_values, dtype=np.float64)
    g_values = np.asarray(g_values, dtype=np.float64)
    if f_values.shape != g_values.shape:
        raise InputError("f and g sample arrays must have the same shape")
    out = np.empty(f_values.size)
    for idx, (fv, gv) in enumerate(zip(f_values.ravel(), g_values.ravel())):
        out[idx] = hamiltonian(rate_a, rate_b, p, q, float(fv), float(gv))
    return out.reshape(f_values.shape)


def closed_form_h_single_gene(p: float, q: float, xi: float, zeta: float) -> float:
    """Closed-form H for one-gene teams, where r(z) = w(z) = z(1 - z).

    Normalized so H(p, q) = 0.  Arguments must be interior to (0, 1).
    """
    for name, value in (("p", p), ("q", q), ("xi", xi), ("zeta", zeta)):
        if not 0.0 < value < 1.0:
            raise DomainError(f"{name} = {value!r} must lie strictly inside (0, 1)")

    def part(z: float, center: float) -> float:
        return (
            -center * np.log(z)
            - (1.0 - center) * np.log(1.0 - z)
            + center * np.log(center)
            + (1.0 - center) * np.log(1.0 - center)
        )

    return float(part(xi, p) + part(zeta, q))


# ----------------------------------------------------------------------------
# time averages and the empirical profile distribution
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeAverages:
    """Trapezoidal time averages over a sampled trajectory."""

    horizon: float
    periods_used: int | None
    f_bar: float
    g_bar: float
    utility_bar: float
    u0_bar: np.ndarray     # per agent, team A then team B
    u1_bar: np.ndarray
    uhat_bar: np.ndarray

    @property
    def regret_gap(self) -> float:
        """Largest deviation of a clamped-allele average from the mixed average."""
        return float(
            max(
                np.max(np.abs(self.u0_bar - self.uhat_bar)),
                np.max(np.abs(self.u1_bar - self.uhat_bar)),
            )
        )


def _per_agent_utilities(game: TeamGame, traj: Trajectory):
    """Per-sample conditional utilities (u0, u1, uhat), agents A then B."""
    x, y = traj.x, traj.y
    f, f0, f1 = batch_stats(game.f, x)
    g, g0, g1 = batch_stats(game.g, y)
    k = game.kernel
    hi = (g * k.a + (1.0 - g) * k.b)[:, None]
    lo = (g * k.c + (1.0 - g) * k.d)[:, None]
    ua0 = f0 * hi + (1.0 - f0) * lo
    ua1 = f1 * hi + (1.0 - f1) * lo
    fcol = f[:, None]
    ub0 = -(fcol * (g0 * k.a + (1.0 - g0) * k.b) + (1.0 - fcol) * (g0 * k.c + (1.0 - g0) * k.d))
    ub1 = -(fcol * (g1 * k.a + (1.0 - g1) * k.b) + (1.0 - fcol) * (g1 * k.c + (1.0 - g1) * k.d))
    u0 = np.hstack([ua0, ub0])
    u1 = np.hstack([ua1, ub1])
    mix = np.hstack([x, y])
    uhat = mix * u0 + (1.0 - mix) * u1
    return u0, u1, uhat


def _truncation(times: np.ndarray, use_integer_periods: bool, period: float | None):
    t0 = times[0]
    span = times[-1] - t0
    if not use_integer_periods:
        return times[-1], None
    if period is None or period <= 0:
        raise InputError("use_integer_periods requires a positive period")
    count = int(np.floor(span / period + 1e-9))
    if count < 1:
        raise InputError("trajectory shorter than one period")
    return min(t0 + count * period, times[-1]), count


def time_averages(
    game: TeamGame,
    traj: Trajectory,
    use_integer_periods: bool = False,
    period: float | None = None,
) -> TimeAverages:
    """Time averages of outputs, team utility, and per-agent utilities.

    With ``use_integer_periods`` the horizon is truncated to the largest
    whole number of periods covered by the trajectory.
    """
    if len(traj) < 2:
        raise InputError("need at least two samples to average")
    t_end, count = _truncation(traj.times, use_integer_periods, period)
    keep = traj.times <= t_end + 1e-12 * max(1.0, abs(t_end))
    times = traj.times[keep]
    u0, u1, uhat = _per_agent_utilities(game, traj)
    columns = [traj.f[keep], traj.g[keep], traj.utility[keep]]
    matrices = [u0[keep], u1[keep], uhat[keep]]
    if times[-1] < t_end - 1e-12 * max(1.0, abs(t_end)):
        frac_src = traj.times
        columns = [
            np.append(col, np.interp(t_end, frac_src, full))
            for col, full in zip(columns, [traj.f, traj.g, traj.utility])
        ]
        matrices = [
            np.vstack([mat, _interp_rows(t_end, frac_src, full)])
            for mat, full in zip(matrices, [u0, u1, uhat])
        ]
        times = np.append(times, t_end)
    horizon = times[-1] - times[0]
    if horizon <= 0:
        raise InputError("degenerate horizon")

    def avg(values: np.ndarray) -> np.ndarray:
        return np.trapezoid(values, times, axis=0) / horizon

    f_bar, g_bar, utility_bar = (float(avg(col)) for col in columns)
    return TimeAverages(
        horizon=float(horizon),
        periods_used=count,
        f_bar=f_bar,
        g_bar=g_bar,
        utility_bar=utility_bar,
        u0_bar=avg(matrices[0]),
        u1_bar=avg(matrices[1]),
        uhat_bar=avg(matrices[2]),
    )


def _interp_rows(t: float, times: np.ndarray, rows: np.ndarray) -> np.ndarray:
    return np.array([np.interp(t, times, rows[:, j]) for j in range(rows.shape[1])])


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    w = np.zeros_like(times)
    w[0] = (times[1] - times[0]) / 2.0
    w[-1] = (times[-1] - times[-2]) / 2.0
    if times.size > 2:
        w[1:-1] = (times[2:] - times[:-2]) / 2.0
    return w / (times[-1] - times[0])


def empirical_profile_distribution(game: TeamGame, traj: Trajectory) -> np.ndarray:
    """Time-average distribution over the 2^(n+m) pure profiles.

    Profile index packs team A's assignment in the low n bits and team B's
    in the next m bits, with the gene-0-is-LSB convention throughout.
    """
    total = game.n + game.m
    if total > PROFILE_CAP:
        raise CapacityError(f"n+m = {total} exceeds the profile cap {PROFILE_CAP}")
    if len(traj) < 2:
        raise InputError("need at least two samples to accumulate a distribution")
    weights = _trapezoid_weights(traj.times)
    bits_a = game.f.bits
    bits_b = game.g.bits
    fa = traj.x[:, None, :] * (1.0 - bits_a) + (1.0 - traj.x[:, None, :]) * bits_a
    pa = fa.prod(axis=2)
    fb = traj.y[:, None, :] * (1.0 - bits_b) + (1.0 - traj.y[:, None, :]) * bits_b
    pb = fb.prod(axis=2)
    joint = (weights[:, None] * pb).T @ pa  # [sigma, s]
    return joint.reshape(-1)


# ----------------------------------------------------------------------------
# correlated equilibrium certification
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class CEReport:
    """Per-agent deviation slacks of a profile distribution.

    ``ce_slacks[i, gamma]`` is the benefit of following recommendation
    ``gamma`` over flipping it; ``cce_slacks[i, gamma]`` the benefit of the
    mixed play over committing to fixed allele ``gamma``.  Nonnegative slacks
    certify the equilibrium property.
    """

    ce_slacks: np.ndarray
    cce_slacks: np.ndarray
    tolerance: float

    @property
    def min_ce_slack(self) -> float:
        return float(self.ce_slacks.min())

    @property
    def min_cce_slack(self) -> float:
        return float(self.cce_slacks.min())

    @property
    def is_ce(self) -> bool:
        return self.min_ce_slack >= -self.tolerance

    def as_dict(self) -> dict:
        return {
            "ce_slacks": self.ce_slacks.tolist(),
            "cce_slacks": self.cce_slacks.tolist(),
            "min_ce_slack": self.min_ce_slack,
            "min_cce_slack": self.min_cce_slack,
            "is_ce": self.is_ce,
            "tolerance": self.tolerance,
        }


def profile_utilities(game: TeamGame) -> np.ndarray:
    """Team A's payoff on every packed pure profile."""
    total = game.n + game.m
    if total > PROFILE_CAP:
        raise CapacityError(f"n+m = {total} exceeds the profile cap {PROFILE_CAP}")
    idx = np.arange(1 << total)
    f_out = game.f.table[idx & ((1 << game.n) - 1)]
    g_out = game.g.table[idx >> game.n]
    k = game.kernel
    return f_out * (g_out * k.a + (1.0 - g_out) * k.b) + (1.0 - f_out) * (
        g_out * k.c + (1.0 - g_out) * k.d
    )


def certify_correlated_equilibrium(
    game: TeamGame, pi: np.ndarray, tol: float = 1e-4
) -> CEReport:
    """Deviation slacks of a profile distribution for every agent.

    The distribution must be nonnegative and sum to 1 (within 1e-9).
    """
    total = game.n + game.m
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (1 << total,):
        raise InputError(f"profile distribution must have length {1 << total}")
    if np.any(pi < -1e-12):
        raise InputError("profile distribution must be nonnegative")
    if abs(float(pi.sum()) - 1.0) > 1e-9:
        raise InputError("profile distribution must sum to 1")
    base = profile_utilities(game)
    idx = np.arange(1 << total)
    ce = np.empty((total, 2))
    cce = np.empty((total, 2))
    for agent in range(total):
        sign = 1.0 if agent < game.n else -1.0
        u = sign * base
        bit = 1 << agent
        flipped = u[idx ^ bit]
        has_one = (idx & bit) != 0
        # recommendation gamma corresponds to allele value gamma of the agent
        gain = pi * (u - flipped)
        ce[agent, 0] = gain[~has_one].sum()
        ce[agent, 1] = gain[has_one].sum()
        u_forced0 = np.where(~has_one, u, flipped)
        u_forced1 = np.where(has_one, u, flipped)
        cce[agent, 0] = float(np.sum(pi * (u - u_forced0)))
        cce[agent, 1] = float(np.sum(pi * (u - u_forced1)))
    return CEReport(ce_slacks=ce, cce_slacks=cce, tolerance=tol)


# ----------------------------------------------------------------------------
# chasing sign test
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ChasingReport:
    """Pointwise sign test of the output-chasing property along a trajectory."""

    total_samples: int
    checked_a: int
    checked_b: int
    violations_a: int
    violations_b: int

    @property
    def ok(self) -> bool:
        return self.violations_a == 0 and self.violations_b == 0

    def as_dict(self) -> dict:
        return {
            "total_samples": self.total_samples,
            "checked_a": self.checked_a,
            "checked_b": self.checked_b,
            "violations_a": self.violations_a,
            "violations_b": self.violations_b,
            "ok": self.ok,
        }


def chasing_check(
    game: TeamGame,
    traj: Trajectory,
    field_kind: str = "rescaled",
    guard: float = 1e-9,
) -> ChasingReport:
    """Verify sign(df/dt) = sign(alpha) sign(g - q) at every recorded sample.

    df/dt is the analytic chain rule over the integrated field (not a finite
    difference).  Samples where a team's rate term is below ``guard`` are not
    checked for that team.  The symmetric test runs for team B.
    """
    x, y = traj.x, traj.y
    f, f0, f1 = batch_stats(game.f, x)
    g, g0, g1 = batch_stats(game.g, y)
    alpha = effective_alpha(game, field_kind)
    k = game.kernel
    if field_kind == "rescaled":
        dx = x * (1.0 - x) * (f0 - f1) * (g - game.nash_q)[:, None]
        dy = -y * (1.0 - y) * (g0 - g1) * (f - game.nash_p)[:, None]
    else:
        hi = (g * k.a + (1.0 - g) * k.b)[:, None]
        lo = (g * k.c + (1.0 - g) * k.d)[:, None]
        ua0 = f0 * hi + (1.0 - f0) * lo
        ua1 = f1 * hi + (1.0 - f1) * lo
        dx = x * (1.0 - x) * (ua0 - ua1)
        fcol = f[:, None]
        ub0 = -(fcol * (g0 * k.a + (1.0 - g0) * k.b) + (1.0 - fcol) * (g0 * k.c + (1.0 - g0) * k.d))
        ub1 = -(fcol * (g1 * k.a + (1.0 - g1) * k.b) + (1.0 - fcol) * (g1 * k.c + (1.0 - g1) * k.d))
        dy = y * (1.0 - y) * (ub0 - ub1)
    dfdt = np.sum((f0 - f1) * dx, axis=1)
    dgdt = np.sum((g0 - g1) * dy, axis=1)
    rate_a = np.sum(x * (1.0 - x) * (f0 - f1) ** 2, axis=1)
    rate_b = np.sum(y * (1.0 - y) * (g0 - g1) ** 2, axis=1)

    sign_alpha = np.sign(alpha)
    mask_a = rate_a > guard
    mask_b = rate_b > guard
    bad_a = np.sign(dfdt[mask_a]) != sign_alpha * np.sign(g[mask_a] - game.nash_q)
    bad_b = np.sign(dgdt[mask_b]) != -sign_alpha * np.sign(f[mask_b] - game.nash_p)
    return ChasingReport(
        total_samples=len(traj),
        checked_a=int(mask_a.sum()),
        checked_b=int(mask_b.sum()),
        violations_a=int(bad_a.sum()),
        violations_b=int(bad_b.sum()),
    )
