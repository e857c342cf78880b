"""Replicator vector fields and trajectory integration.

Two equivalent vector fields are exposed.  The raw field is the replicator
equation written through conditional agent utilities,

    dx_i/dt = x_i (1 - x_i) (u_i0 - u_i1),
    dy_j/dt = y_j (1 - y_j) (v_j0 - v_j1),

with v the team-B agents' own (negated-kernel) utilities.  The rescaled
field divides out the kernel constant alpha = a - b - c + d:

    dx_i/dt = x_i (1 - x_i) (f_i0 - f_i1) (g - q),
    dy_j/dt = -y_j (1 - y_j) (g_j0 - g_j1) (f - p),

so raw = alpha * rescaled holds componentwise.  Rescaling changes only the
time parametrization, never the orbit shape, and is the default for
simulation; the raw field is kept for cross-validation.

Integration offers a fixed-step classical 4th-order scheme and an embedded
adaptive 4(5) Dormand-Prince pair.  Dense output between accepted steps is
cubic Hermite interpolation on the stored endpoint derivatives; recorded
samples are clamped to [0, 1]^(n+m) (the clamp absorbs roundoff only, and
the largest pre-clamp excursion is reported in the trajectory metadata).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .boolfn import BooleanFunction, ProductDistribution, _expectation, _stats
from .errors import InputError, IntegrationError
from .game import TeamGame

FIELD_KINDS = ("rescaled", "raw")

#: adaptive steps below this size abort the integration
MIN_STEP = 1e-14


@dataclass(frozen=True)
class SystemState:
    """Joint state: allele-0 marginals of both teams."""

    x: ProductDistribution
    y: ProductDistribution

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x.values, self.y.values])

    @classmethod
    def from_vector(cls, game: TeamGame, vec) -> "SystemState":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (game.n + game.m,):
            raise InputError(
                f"state must have {game.n + game.m} coordinates, got shape {vec.shape}"
            )
        return cls(
            ProductDistribution(vec[: game.n]), ProductDistribution(vec[game.n :])
        )


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``method`` is "adaptive" (embedded Dormand-Prince 4(5) pair controlled by
    ``abs_tol``/``rel_tol``) or "rk4" (fixed-step classical Runge-Kutta using
    ``step``).  ``sample_interval`` is the recording cadence; ``max_step``
    bounds adaptive steps so dense output stays accurate.
    """

    method: str = "adaptive"
    step: float | None = None
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_step: float = 0.25
    max_time: float = 200.0
    sample_interval: float = 0.05

    def __post_init__(self):
        if self.method not in ("adaptive", "rk4"):
            raise InputError(f"method must be 'adaptive' or 'rk4', got {self.method!r}")
        if self.method == "rk4":
            if self.step is None or self.step <= 0:
                raise InputError("rk4 requires a positive fixed step")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise InputError("tolerances must be positive")
        if self.max_step <= 0:
            raise InputError("max_step must be positive")
        if self.max_time <= 0:
            raise InputError("max_time must be positive")
        if self.sample_interval <= 0:
            raise InputError("sample_interval must be positive")

    def replace(self, **kwargs) -> "IntegratorConfig":
        from dataclasses import replace as _replace

        return _replace(self, **kwargs)


def _team_split(game: TeamGame, state) -> tuple[np.ndarray, np.ndarray]:
    vec = state.vector if isinstance(state, SystemState) else np.asarray(state, float)
    if vec.shape != (game.n + game.m,):
        raise InputError(
            f"state must have {game.n + game.m} coordinates, got shape {vec.shape}"
        )
    return vec[: game.n], vec[game.n :]


def rescaled_field(game: TeamGame, state) -> np.ndarray:
    """Derivative of (x, y) under the rescaled system (alpha set to 1)."""
    x, y = _team_split(game, state)
    f, f0, f1 = _stats(game.f, x)
    g, g0, g1 = _stats(game.g, y)
    dx = x * (1.0 - x) * (f0 - f1) * (g - game.nash_q)
    dy = -y * (1.0 - y) * (g0 - g1) * (f - game.nash_p)
    return np.concatenate([dx, dy])


def raw_field(game: TeamGame, state) -> np.ndarray:
    """Derivative of (x, y) under the replicator equation with kernel utilities."""
    x, y = _team_split(game, state)
    k = game.kernel
    f, f0, f1 = _stats(game.f, x)
    g, g0, g1 = _stats(game.g, y)
    hi = g * k.a + (1.0 - g) * k.b
    lo = g * k.c + (1.0 - g) * k.d
    u0 = f0 * hi + (1.0 - f0) * lo
    u1 = f1 * hi + (1.0 - f1) * lo
    dx = x * (1.0 - x) * (u0 - u1)
    v0 = -(f * (g0 * k.a + (1.0 - g0) * k.b) + (1.0 - f) * (g0 * k.c + (1.0 - g0) * k.d))
    v1 = -(f * (g1 * k.a + (1.0 - g1) * k.b) + (1.0 - f) * (g1 * k.c + (1.0 - g1) * k.d))
    dy = y * (1.0 - y) * (v0 - v1)
    return np.concatenate([dx, dy])


def subsystem_field(fn: BooleanFunction, x) -> np.ndarray:
    """Single-team field dx_i/dt = x_i (1 - x_i) (f_i0 - f_i1)."""
    vec = x.values if isinstance(x, ProductDistribution) else np.asarray(x, float)
    if vec.shape != (fn.arity,):
        raise InputError(f"state must have {fn.arity} coordinates, got shape {vec.shape}")
    _, f0, f1 = _stats(fn, vec)
    return vec * (1.0 - vec) * (f0 - f1)


def field_function(game: TeamGame, kind: str) -> Callable[[np.ndarray], np.ndarray]:
    if kind == "rescaled":
        return lambda z: rescaled_field(game, z)
    if kind == "raw":
        return lambda z: raw_field(game, z)
    raise InputError(f"field must be one of {FIELD_KINDS}, got {kind!r}")


def effective_alpha(game: TeamGame, kind: str) -> float:
    """Constant multiplying the rescaled field in the integrated system."""
    if kind == "rescaled":
        return 1.0
    if kind == "raw":
        return game.kernel.alpha
    raise InputError(f"field must be one of {FIELD_KINDS}, got {kind!r}")


# ----------------------------------------------------------------------------
# stepping machinery
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    """One accepted integration step with endpoint derivatives."""

    t0: float
    y0: np.ndarray
    d0: np.ndarray
    t1: float
    y1: np.ndarray
    d1: np.ndarray

    def interpolate(self, t: float) -> np.ndarray:
        """Cubic Hermite dense output at ``t`` in [t0, t1]."""
        h = self.t1 - self.t0
        tau = (t - self.t0) / h
        t2 = tau * tau
        t3 = t2 * tau
        return (
            (2.0 * t3 - 3.0 * t2 + 1.0) * self.y0
            + (t3 - 2.0 * t2 + tau) * h * self.d0
            + (-2.0 * t3 + 3.0 * t2) * self.y1
            + (t3 - t2) * h * self.d1
        )


# Dormand-Prince 4(5) embedded pair (propagates the 5th-order solution).
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# difference between the 5th- and 4th-order weights (error estimator)
_DP_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def adaptive_steps(
    deriv: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_end: float,
    config: IntegratorConfig,
) -> Iterator[Step]:
    """Accepted Dormand-Prince steps from t = 0 to ``t_end`` (autonomous field).

    Raises :class:`IntegrationError` when the controller pushes the step
    below ``MIN_STEP``.
    """
    y = np.asarray(y0, dtype=np.float64).copy()
    t = 0.0
    d = deriv(y)
    h = min(config.max_step, config.sample_interval, 1e-2)
    k = [np.empty_like(y) for _ in range(7)]
    while t < t_end * (1.0 - 1e-15) if t_end > 0 else False:
        h = min(h, config.max_step, t_end - t)
        if h < MIN_STEP:
            raise IntegrationError(f"adaptive step underflow at t = {t:.6g}")
        k[0] = d
        for stage in range(1, 7):
            acc = _DP_A[stage][0] * k[0]
            for j in range(1, stage):
                coeff = _DP_A[stage][j]
                if coeff != 0.0:
                    acc = acc + coeff * k[j]
            k[stage] = deriv(y + h * acc)
        y1 = y + h * (
            _DP_A[6][0] * k[0]
            + _DP_A[6][2] * k[2]
            + _DP_A[6][3] * k[3]
            + _DP_A[6][4] * k[4]
            + _DP_A[6][5] * k[5]
        )
        err = h * (
            _DP_E[0] * k[0]
            + _DP_E[2] * k[2]
            + _DP_E[3] * k[3]
            + _DP_E[4] * k[4]
            + _DP_E[5] * k[5]
            + _DP_E[6] * k[6]
        )
        scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y1))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            t1 = t + h
            d1 = k[6]  # FSAL: already the derivative at (t1, y1)
            yield Step(t, y, d, t1, y1, d1)
            t, y, d = t1, y1, d1
            factor = 5.0 if err_norm == 0.0 else min(5.0, 0.9 * err_norm ** -0.2)
            h *= max(factor, 0.2)
        else:
            h *= max(0.2, 0.9 * err_norm ** -0.2)


def rk4_steps(
    deriv: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_end: float,
    step: float,
) -> Iterator[Step]:
    """Classical fixed-step 4th-order Runge-Kutta steps from t = 0."""
    y = np.asarray(y0, dtype=np.float64).copy()
    t = 0.0
    d = deriv(y)
    while t < t_end * (1.0 - 1e-15):
        h = min(step, t_end - t)
        k1 = d
        k2 = deriv(y + 0.5 * h * k1)
        k3 = deriv(y + 0.5 * h * k2)
        k4 = deriv(y + h * k3)
        y1 = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t1 = t + h
        d1 = deriv(y1)
        yield Step(t, y, d, t1, y1, d1)
        t, y, d = t1, y1, d1


def step_stream(deriv, y0, t_end: float, config: IntegratorConfig) -> Iterator[Step]:
    if config.method == "adaptive":
        return adaptive_steps(deriv, y0, t_end, config)
    return rk4_steps(deriv, y0, t_end, config.step)


# ----------------------------------------------------------------------------
# trajectories
# ----------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled system trajectory with per-sample derived scalars."""

    times: np.ndarray        # (N,)
    states: np.ndarray       # (N, n + m), clamped to [0, 1]
    f: np.ndarray            # expected output of team A per sample
    g: np.ndarray            # expected output of team B per sample
    utility: np.ndarray      # team A expected payoff per sample
    n: int
    m: int
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size

    @property
    def x(self) -> np.ndarray:
        return self.states[:, : self.n]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, self.n :]

    def boundary_distance(self) -> float:
        """Smallest distance of any recorded coordinate to {0, 1}."""
        return float(np.min(np.minimum(self.states, 1.0 - self.states)))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            self.write_csv_stream(handle)

    def write_csv_stream(self, handle: io.TextIOBase) -> None:
        cols = (
            ["t"]
            + [f"x_{i + 1}" for i in range(self.n)]
            + [f"y_{j + 1}" for j in range(self.m)]
            + ["f", "g", "uA"]
        )
        handle.write(",".join(cols) + "\n")
        for idx in range(len(self)):
            row = (
                [self.times[idx]]
                + list(self.states[idx])
                + [self.f[idx], self.g[idx], self.utility[idx]]
            )
            handle.write(",".join(format(v, ".17g") for v in row) + "\n")

    @classmethod
    def read_csv(cls, path) -> "Trajectory":
        text = Path(path).read_text().strip().splitlines()
        if not text:
            raise InputError(f"empty trajectory file {path}")
        header = text[0].split(",")
        n = sum(1 for name in header if name.startswith("x_"))
        m = sum(1 for name in header if name.startswith("y_"))
        expected = ["t"] + [f"x_{i+1}" for i in range(n)] + [f"y_{j+1}" for j in range(m)]
        expected += ["f", "g", "uA"]
        if header != expected:
            raise InputError(f"unexpected trajectory header {header}")
        data = np.array(
            [[float(v) for v in line.split(",")] for line in text[1:]], dtype=np.float64
        )
        if data.ndim != 2 or data.shape[1] != len(header):
            raise InputError("malformed trajectory rows")
        return cls(
            times=data[:, 0],
            states=data[:, 1 : 1 + n + m],
            f=data[:, 1 + n + m],
            g=data[:, 2 + n + m],
            utility=data[:, 3 + n + m],
            n=n,
            m=m,
        )

    def columns(self) -> dict[str, np.ndarray]:
        out = {"t": self.times, "f": self.f, "g": self.g, "uA": self.utility}
        for i in range(self.n):
            out[f"x_{i + 1}"] = self.states[:, i]
        for j in range(self.m):
            out[f"y_{j + 1}"] = self.states[:, self.n + j]
        return out


@dataclass
class SubsystemTrajectory:
    """Sampled single-team trajectory with the running expected output."""

    times: np.ndarray
    states: np.ndarray
    f: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size


def _sample_times(t_end: float, interval: float) -> np.ndarray:
    count = int(np.floor(t_end / interval + 1e-9))
    return np.arange(count + 1) * interval


def _collect_samples(deriv, z0, config: IntegratorConfig):
    """Run the stepper, interpolate the sample grid, clamp, track excursion."""
    sample_ts = _sample_times(config.max_time, config.sample_interval)
    samples = np.empty((sample_ts.size, z0.size))
    samples[0] = z0
    excursion = 0.0
    next_idx = 1
    partial = False
    try:
        for step in step_stream(deriv, z0, config.max_time, config):
            while next_idx < sample_ts.size and sample_ts[next_idx] <= step.t1 + 1e-12 * max(
                1.0, step.t1
            ):
                ts = sample_ts[next_idx]
                state = step.y1 if ts >= step.t1 else step.interpolate(ts)
                excursion = max(excursion, float(np.max(state - 1.0)), float(np.max(-state)))
                samples[next_idx] = np.clip(state, 0.0, 1.0)
                next_idx += 1
    except IntegrationError:
        partial = True
    sample_ts = sample_ts[:next_idx]
    samples = samples[:next_idx]
    return sample_ts, samples, max(excursion, 0.0), partial


def integrate(
    game: TeamGame, state0, config: IntegratorConfig, field_kind: str = "rescaled"
) -> Trajectory:
    """Integrate the full system and sample it every ``sample_interval``.

    On adaptive step underflow an :class:`IntegrationError` is raised with
    the partial trajectory attached.
    """
    z0 = (
        state0.vector
        if isinstance(state0, SystemState)
        else SystemState.from_vector(game, state0).vector
    )
    deriv = field_function(game, field_kind)
    times, states, excursion, partial = _collect_samples(deriv, z0, config)
    from .boolfn import batch_stats

    fvals = batch_stats(game.f, states[:, : game.n])[0]
    gvals = batch_stats(game.g, states[:, game.n :])[0]
    k = game.kernel
    utility = (
        fvals * gvals * k.a
        + fvals * (1.0 - gvals) * k.b
        + (1.0 - fvals) * gvals * k.c
        + (1.0 - fvals) * (1.0 - gvals) * k.d
    )
    traj = Trajectory(
        times=times,
        states=states,
        f=fvals,
        g=gvals,
        utility=utility,
        n=game.n,
        m=game.m,
        metadata={
            "game": game.describe(),
            "field": field_kind,
            "initial_state": [float(v) for v in z0],
            "config": {
                "method": config.method,
                "step": config.step,
                "abs_tol": config.abs_tol,
                "rel_tol": config.rel_tol,
                "max_step": config.max_step,
                "max_time": config.max_time,
                "sample_interval": config.sample_interval,
            },
            "max_boundary_excursion": excursion,
        },
    )
    if partial:
        raise IntegrationError(
            f"adaptive step underflow after t = {times[-1]:.6g}", trajectory=traj
        )
    return traj


def integrate_subsystem(
    fn: BooleanFunction, x0, config: IntegratorConfig, direction: str = "forward"
) -> SubsystemTrajectory:
    """Integrate one team's subsystem dx_i/dt = x_i(1-x_i)(f_i0 - f_i1).

    ``direction`` "backward" integrates the time-reversed field; recorded
    times are the (nonnegative) elapsed durations either way.
    """
    vec = ProductDistribution.coerce(x0, fn.arity).values
    if direction == "forward":
        deriv = lambda x: subsystem_field(fn, x)  # noqa: E731
    elif direction == "backward":
        deriv = lambda x: -subsystem_field(fn, x)  # noqa: E731
    else:
        raise InputError(f"direction must be 'forward' or 'backward', got {direction!r}")
    times, states, excursion, partial = _collect_samples(deriv, vec, config)
    from .boolfn import batch_stats

    fvals = batch_stats(fn, states)[0]
    traj = SubsystemTrajectory(
        times=times,
        states=states,
        f=fvals,
        metadata={"direction": direction, "max_boundary_excursion": excursion},
    )
    if partial:
        raise IntegrationError(
            f"adaptive step underflow after t = {times[-1]:.6g}", trajectory=traj
        )
    return traj
