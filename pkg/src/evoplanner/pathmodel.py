"""Rotated-frame path representation, search bounds and heuristic initialization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidSpecError

Z_HEADROOM = 60.0


@dataclass(frozen=True)
class RotatedFrame:
    """Frame whose X axis points from the start to the target.

    ``theta`` is the angle from the world X axis; ``origin`` the start's
    horizontal position. Heights are shared with the world frame.
    """

    theta: float
    origin: tuple

    @classmethod
    def from_scenario(cls, scenario):
        sx, sy = scenario.start[:2]
        tx, ty = scenario.target[:2]
        return cls(math.atan2(ty - sy, tx - sx), (float(sx), float(sy)))

    def to_world(self, p):
        p = np.asarray(p, dtype=float)
        c, s = math.cos(self.theta), math.sin(self.theta)
        out = np.empty_like(p)
        out[..., 0] = p[..., 0] * c - p[..., 1] * s + self.origin[0]
        out[..., 1] = p[..., 0] * s + p[..., 1] * c + self.origin[1]
        out[..., 2:] = p[..., 2:]
        return out

    def to_rotated(self, w):
        w = np.asarray(w, dtype=float)
        c, s = math.cos(self.theta), math.sin(self.theta)
        dx = w[..., 0] - self.origin[0]
        dy = w[..., 1] - self.origin[1]
        out = np.empty_like(w)
        out[..., 0] = dx * c + dy * s
        out[..., 1] = -dx * s + dy * c
        out[..., 2:] = w[..., 2:]
        return out


def to_world(frame, p):
    return frame.to_world(p)


def to_rotated(frame, w):
    return frame.to_rotated(w)


@dataclass(frozen=True)
class ControlPath:
    """Interior control points of a path in the rotated frame.

    ``start``/``end`` are the rotated mission endpoints; they anchor the
    smoothers but are not decision variables.
    """

    points: np.ndarray
    start: tuple
    end: tuple

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
            raise InvalidSpecError("a control path needs at least 2 points of (x, y, z)")
        if not np.all(np.isfinite(pts)):
            raise InvalidSpecError("control points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "end", tuple(float(v) for v in self.end))

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def delta_l(self):
        return (self.end[0] - self.start[0]) / (self.n + 1)

    def full(self):
        """Control sequence including both endpoints, shape ``(n + 2, 3)``."""
        return np.vstack([self.start, self.points, self.end])


@dataclass(frozen=True)
class Waypoints:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
            raise InvalidSpecError("waypoints need shape (m >= 2, 3)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def m(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class PathBounds:
    """Box limits on the control points.

    Control point ``i`` (1-based) has its rotated x locked in
    ``[(i - 1) * delta_l, (i + 1) * delta_l]`` and every y in
    ``[y_min, y_max]``. ``z_min``/``z_max`` only serve the clamp.
    """

    y_min: float
    y_max: float
    x_windows: np.ndarray
    delta_d: float
    delta_D: float
    z_min: float
    z_max: float

    def __post_init__(self):
        win = np.array(self.x_windows, dtype=float)
        if not self.y_min < self.y_max:
            raise InvalidSpecError("y_min must be below y_max")
        if win.ndim != 2 or win.shape[1] != 2 or np.any(win[:, 1] <= win[:, 0]):
            raise InvalidSpecError("every x window must be non-empty")
        win.setflags(write=False)
        object.__setattr__(self, "x_windows", win)

    @property
    def n(self):
        return self.x_windows.shape[0]

    @property
    def delta_l(self):
        return float(self.x_windows[0, 1]) / 2.0

    @property
    def lower(self):
        lo = np.empty((self.n, 3))
        lo[:, 0] = self.x_windows[:, 0]
        lo[:, 1] = self.y_min
        lo[:, 2] = self.z_min
        return lo

    @property
    def upper(self):
        hi = np.empty((self.n, 3))
        hi[:, 0] = self.x_windows[:, 1]
        hi[:, 1] = self.y_max
        hi[:, 2] = self.z_max
        return hi

    def clamp(self, X):
        """Project control points into the box and restore x monotonicity.

        Works on ``(..., n, 3)``. Sorting the clipped x column keeps every
        value inside its window because neighbouring windows overlap.
        """
        X = np.clip(X, self.lower, self.upper)
        X[..., 0] = np.sort(X[..., 0], axis=-1)
        return X

    def out_of_range(self, X):
        """Per-point OutRange indicator, shape ``(..., n)``."""
        X = np.asarray(X, dtype=float)
        x = X[..., 0]
        y = X[..., 1]
        bad_x = (x < self.x_windows[:, 0]) | (x > self.x_windows[:, 1])
        bad_y = (y < self.y_min) | (y > self.y_max)
        return bad_x | bad_y


def compute_bounds(scenario, frame, n, delta_d=10.0):
    """Corridor bounds around the start-target line.

    The lateral range extends the extreme threat edges (or the line itself)
    outward by ``delta_d``; the Markov corridor width equals ``delta_l``.
    """
    if n < 2:
        raise InvalidSpecError("need at least 2 control points")
    length = math.hypot(
        scenario.target[0] - scenario.start[0], scenario.target[1] - scenario.start[1]
    )
    delta_l = length / (n + 1)
    lows, highs = [0.0], [0.0]
    for threat in scenario.threats:
        y_star = float(frame.to_rotated(np.array([*threat.center, 0.0]))[1])
        lows.append(y_star - threat.radius)
        highs.append(y_star + threat.radius)
    idx = np.arange(1, n + 1)
    windows = np.stack([(idx - 1) * delta_l, (idx + 1) * delta_l], axis=1)
    grid = scenario.terrain.grid
    return PathBounds(
        y_min=min(lows) - delta_d,
        y_max=max(highs) + delta_d,
        x_windows=windows,
        delta_d=float(delta_d),
        delta_D=delta_l,
        z_min=float(grid.min()),
        z_max=float(grid.max()) + scenario.safe_height + Z_HEADROOM,
    )


def sample_control_x(rng, n, delta_l, size=None, clamp=True):
    """x coordinates drawn from Normal(i * delta_l, delta_l / 3), sorted."""
    shape = (n,) if size is None else (size, n)
    idx = np.arange(1, n + 1)
    centers = idx * delta_l
    x = rng.normal(centers, delta_l / 3.0, size=shape)
    if clamp:
        # same expressions as the bound windows, so clipped values never miss them by an ulp
        x = np.clip(x, (idx - 1) * delta_l, (idx + 1) * delta_l)
        x = np.sort(x, axis=-1)
    return x


def initialize_population(scenario, frame, bounds, size, rng, y_shift=0.0):
    """Batch heuristic initialization, returns ``(size, n, 3)`` control points.

    ``y_shift`` biases the first lateral corridor; the multi-population
    division uses it to spread populations across the mission band.
    """
    n = bounds.n
    delta_l = bounds.delta_l
    delta_D = bounds.delta_D
    delta_h = delta_l / 3.0
    x = sample_control_x(rng, n, delta_l, size)
    y = np.empty((size, n))
    prev_x = np.zeros(size)
    prev_y = np.zeros(size)
    pprev_x = np.full(size, np.nan)
    pprev_y = np.full(size, np.nan)
    for i in range(n):
        if i == 0:
            y_t = np.full(size, float(y_shift))
        else:
            dx = prev_x - pprev_x
            with np.errstate(invalid="ignore", divide="ignore"):
                slope = (prev_y - pprev_y) / dx
            y_t = np.where(np.isfinite(slope), prev_y + slope * (x[:, i] - prev_x), prev_y)
        y_t = np.clip(y_t, bounds.y_min, bounds.y_max)
        y[:, i] = np.clip(
            rng.uniform(y_t - delta_D, y_t + delta_D), bounds.y_min, bounds.y_max
        )
        pprev_x, pprev_y = prev_x, prev_y
        prev_x, prev_y = x[:, i], y[:, i]

    pts = np.stack([x, y, np.zeros_like(x)], axis=-1)
    world = frame.to_world(pts)
    ground = scenario.terrain.heights(world[..., 0], world[..., 1], clip=True)
    start_clearance = scenario.start[2] - float(
        scenario.terrain.heights(scenario.start[0], scenario.start[1], clip=True)
    )
    z = np.empty((size, n))
    z[:, 0] = ground[:, 0] + start_clearance
    for i in range(1, n):
        mean = z[:, i - 1] + ground[:, i] - ground[:, i - 1]
        z[:, i] = rng.normal(mean, delta_h)
    pts[..., 2] = np.clip(z, bounds.z_min, bounds.z_max)
    return pts


def endpoints_rotated(scenario, frame):
    s = frame.to_rotated(np.array(scenario.start))
    t = frame.to_rotated(np.array(scenario.target))
    # the endpoints sit on the X_R axis by construction
    s[1] = 0.0
    t[1] = 0.0
    s[0] = 0.0
    return tuple(s), tuple(t)


def initialize_path(scenario, frame, bounds, n, rng):
    if n != bounds.n:
        raise InvalidSpecError("bounds were computed for a different point count")
    pts = initialize_population(scenario, frame, bounds, 1, rng)[0]
    start, end = endpoints_rotated(scenario, frame)
    return ControlPath(pts, start, end)


def control_points_in_range(path, bounds):
    """Number of control points outside their box (h2)."""
    pts = path.points if isinstance(path, ControlPath) else np.asarray(path)
    return int(np.count_nonzero(bounds.out_of_range(pts)))
