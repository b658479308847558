"""Objectives, constraints and the aggregate fitness of a waypoint path.

Every function accepts a single path ``(m, 3)`` or a batch ``(..., m, 3)``;
batch evaluation is what the planners use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, InvalidSpecError
from .pathmodel import PathBounds, RotatedFrame, Waypoints, compute_bounds, endpoints_rotated
from .scenario import NFZ
from .smoothing import BSPLINE, smooth_batch

STEEP_SLOPE = 1e6
RCS_FLOOR = 1e-12


def _pts(w):
    return w.points if isinstance(w, Waypoints) else np.asarray(w, dtype=float)


@dataclass(frozen=True)
class ObjectiveWeights:
    w1: float = 0.5
    w2: float = 0.05
    w3: float = 0.15
    w4: float = 0.15
    w5: float = 0.15

    def __post_init__(self):
        vals = self.as_array()
        if np.any(vals < 0) or abs(vals.sum() - 1.0) > 1e-12:
            raise ConfigError("objective weights must be non-negative and sum to 1")

    def as_array(self):
        return np.array([self.w1, self.w2, self.w3, self.w4, self.w5], dtype=float)


def f_length(w):
    """Path length over the straight start-to-end distance."""
    p = _pts(w)
    num = np.linalg.norm(np.diff(p, axis=-2), axis=-1).sum(axis=-1)
    den = np.linalg.norm(p[..., -1, :] - p[..., 0, :], axis=-1)
    if np.any(den <= 0):
        raise InvalidSpecError("path start and end coincide")
    return num / den


def f_altitude(w, terrain, clip=False):
    """Mean clearance above ground over waypoints 2..m, zero below ground."""
    p = _pts(w)
    m = p.shape[-2]
    ground = terrain.heights(p[..., 1:, 0], p[..., 1:, 1], clip=clip)
    clearance = p[..., 1:, 2] - ground
    return np.where(clearance > 0, clearance / m, 0.0).sum(axis=-1)


@dataclass(frozen=True)
class RadarGeometry:
    """Angles that enter the radar cross section of one waypoint.

    ``psi_e`` is the angle between the velocity and the UAV-to-radar
    segment; ``phi_e = roll - arctan(tan(elevation) / sin(azimuth))`` with
    the azimuth measured from the heading.
    """

    d: float
    psi_e: float
    phi_e: float
    roll: float = 0.0
    elevation: float = 0.0
    azimuth: float = 0.0


def _signed_floor(x, eps=1e-12):
    return np.where(x >= 0, np.maximum(x, eps), np.minimum(x, -eps))


def radar_geometry(w, radar_pos, roll=0.0):
    """Per-waypoint geometry for waypoints 2..m; arrays of shape ``(..., m-1)``."""
    p = _pts(w)
    vel = p[..., 1:, :] - p[..., :-1, :]
    rel = np.asarray(radar_pos, dtype=float) - p[..., 1:, :]
    d = np.linalg.norm(rel, axis=-1)
    vnorm = np.linalg.norm(vel, axis=-1)
    denom = vnorm * d
    cos_psi = np.where(denom > 0, np.sum(vel * rel, axis=-1) / np.where(denom > 0, denom, 1.0), 1.0)
    psi_e = np.arccos(np.clip(cos_psi, -1.0, 1.0))
    heading = np.arctan2(vel[..., 1], vel[..., 0])
    azimuth = np.arctan2(rel[..., 1], rel[..., 0]) - heading
    elevation = np.arctan2(rel[..., 2], np.hypot(rel[..., 0], rel[..., 1]))
    phi_e = roll - np.arctan(np.tan(elevation) / _signed_floor(np.sin(azimuth)))
    return d, psi_e, phi_e


def radar_cross_section(psi_e, phi_e, uav):
    """Ellipsoid cross section for the aspect angles ``psi_e``/``phi_e``."""
    a, b, c = uav.a, uav.b, uav.c
    az, bz = np.sin(psi_e), np.cos(psi_e)
    ap, bp = np.sin(phi_e), np.cos(phi_e)
    den = ((a * az * bp) ** 2 + (b * az * ap) ** 2 + (c * bz) ** 2) ** 2
    return math.pi * a**2 * b**2 * c**2 / np.maximum(den, RCS_FLOOR)


def radar_probability(geom, radar, uav):
    """Detection probability; 0 beyond the radar range."""
    if radar.kind != "radar":
        raise InvalidSpecError("radar_probability needs a radar threat")
    if isinstance(geom, RadarGeometry):
        d, psi_e, phi_e = geom.d, geom.psi_e, geom.phi_e
    else:
        d, psi_e, phi_e = geom
    d = np.asarray(d, dtype=float)
    rcs = radar_cross_section(psi_e, phi_e, uav)
    p = 1.0 / (1.0 + radar.zeta2 * (d**4 / rcs) ** radar.zeta1)
    out = np.where(d > radar.radius, 0.0, p)
    return float(out) if out.ndim == 0 else out


def threat_position(threat, terrain):
    """3-D threat position: its center at ground level."""
    x, y = threat.center
    return np.array([x, y, float(terrain.heights(x, y, clip=True))])


def _radar_sum(p, radar, pos, uav):
    """Detection probabilities summed over waypoints 2..m.

    Geometry is only computed for waypoints inside the radar range.
    """
    d_all = np.linalg.norm(p[..., 1:, :] - pos, axis=-1)
    near = d_all <= radar.radius
    probs = np.zeros(d_all.shape)
    if np.any(near):
        idx = np.nonzero(near)
        cur = p[..., 1:, :][idx]
        prev = p[..., :-1, :][idx]
        seg = np.stack([prev, cur], axis=-2)
        d, psi_e, phi_e = radar_geometry(seg, pos)
        probs[idx] = radar_probability((d[..., 0], psi_e[..., 0], phi_e[..., 0]), radar, uav)
    return probs.sum(axis=-1)


def f_radar(w, scenario):
    p = _pts(w)
    total = np.zeros(p.shape[:-2])
    for radar in scenario.radars:
        total = total + _radar_sum(p, radar, threat_position(radar, scenario.terrain), scenario.uav)
    return total


def missile_probability(d, R_M):
    d = np.asarray(d, dtype=float)
    p = np.where(d <= R_M, R_M**4 / (R_M**4 + d**4), 0.0)
    return float(p) if p.ndim == 0 else p


def _missile_sum(p, missile, pos):
    d = np.linalg.norm(p[..., 1:, :] - pos, axis=-1)
    return np.sum(missile_probability(d, missile.radius), axis=-1)


def f_missile(w, scenario):
    p = _pts(w)
    total = np.zeros(p.shape[:-2])
    for missile in scenario.missiles:
        total = total + _missile_sum(p, missile, threat_position(missile, scenario.terrain))
    return total


def f_turning(w, reference="target"):
    """Sum over waypoints 2..m of the angle between the incoming segment and
    the direction to the final waypoint, both projected on the ground plane.
    Zero-length projections contribute nothing.

    ``reference="next"`` measures against the outgoing segment instead, the
    conventional turning-angle definition.
    """
    p = _pts(w)
    a = p[..., 1:, :2] - p[..., :-1, :2]
    if reference == "target":
        b = p[..., -1:, :2] - p[..., 1:, :2]
    elif reference == "next":
        a = a[..., :-1, :]
        b = p[..., 2:, :2] - p[..., 1:-1, :2]
    else:
        raise InvalidSpecError(f"unknown turning reference {reference!r}")
    na = np.linalg.norm(a, axis=-1)
    nb = np.linalg.norm(b, axis=-1)
    den = na * nb
    ok = den > 0
    cos = np.where(ok, np.sum(a * b, axis=-1) / np.where(ok, den, 1.0), 1.0)
    theta = np.where(ok, np.arccos(np.clip(cos, -1.0, 1.0)), 0.0)
    return theta.sum(axis=-1)


def climb_limit(z):
    return -1.5377e-10 * z**2 - 2.6997e-5 * z + 0.4211


def glide_limit(z):
    return 2.5063e-9 * z**2 - 6.3014e-6 * z - 0.3257


def slopes(w, steep=STEEP_SLOPE):
    """Vertical over horizontal run for every segment, ``(..., m-1)``."""
    p = _pts(w)
    dz = np.diff(p[..., 2], axis=-1)
    run = np.hypot(np.diff(p[..., 0], axis=-1), np.diff(p[..., 1], axis=-1))
    return np.where(run > 0, dz / np.where(run > 0, run, 1.0), np.sign(dz) * steep)


def nfz_hits(w, scenario):
    """Number of waypoints inside any no-fly zone."""
    p = _pts(w)
    inside = np.zeros(p.shape[:-1], dtype=bool)
    for nfz in scenario.nfzs:
        inside |= nfz.contains_xy(p[..., 0], p[..., 1])
    return inside.sum(axis=-1)


def eval_constraints(w, p, scenario, bounds, clip=True, steep=STEEP_SLOPE):
    """Constraint vector ``(g1, g2, g3, h1, h2)`` stacked on the last axis.

    Slopes cover every segment; the clearance term covers the interior
    waypoints 2..m-1 (the endpoints are fixed mission points).
    ``p`` is a control path or an array of control points ``(..., n, 3)``.
    """
    pts = _pts(w)
    s = slopes(pts, steep)
    z = pts[..., :-1, 2]
    g1 = np.max(s - climb_limit(z), axis=-1)
    g2 = np.max(glide_limit(z) - s, axis=-1)
    inner = pts[..., 1:-1, :]
    if inner.shape[-2] > 0:
        ground = scenario.terrain.heights(inner[..., 0], inner[..., 1], clip=clip)
        g3 = scenario.safe_height - np.min(inner[..., 2] - ground, axis=-1)
    else:
        g3 = np.full(pts.shape[:-2], -np.inf)
    h1 = nfz_hits(pts, scenario)
    ctrl = p.points if hasattr(p, "points") else np.asarray(p, dtype=float)
    h2 = np.count_nonzero(bounds.out_of_range(ctrl), axis=-1)
    return np.stack(np.broadcast_arrays(g1, g2, g3, h1, h2), axis=-1).astype(float)


def violation_total(cons):
    """Sum of positive constraint parts plus the h counts."""
    cons = np.asarray(cons, dtype=float)
    return np.maximum(cons[..., :3], 0.0).sum(axis=-1) + cons[..., 3] + cons[..., 4]


def is_feasible(cons):
    cons = np.asarray(cons, dtype=float)
    return np.all(cons[..., :3] <= 0, axis=-1) & (cons[..., 3] == 0) & (cons[..., 4] == 0)


def aggregate(objectives, weights):
    if not isinstance(weights, ObjectiveWeights):
        weights = ObjectiveWeights(*weights)
    return np.asarray(objectives, dtype=float) @ weights.as_array()


@dataclass(frozen=True)
class EvaluationReport:
    f: tuple
    F: float
    g1: float
    g2: float
    g3: float
    h1: int
    h2: int

    @property
    def constraints(self):
        return (self.g1, self.g2, self.g3, self.h1, self.h2)

    @property
    def feasible(self):
        return bool(is_feasible(np.array(self.constraints)))

    @property
    def violation(self):
        return float(violation_total(np.array(self.constraints)))

    @classmethod
    def from_arrays(cls, objs, F, cons):
        return cls(
            tuple(float(v) for v in objs),
            float(F),
            float(cons[0]),
            float(cons[1]),
            float(cons[2]),
            int(cons[3]),
            int(cons[4]),
        )

    def to_dict(self):
        return {
            "f": list(self.f),
            "F": self.F,
            "constraints": [self.g1, self.g2, self.g3, self.h1, self.h2],
            "violation": self.violation,
            "feasible": self.feasible,
        }


@dataclass(frozen=True)
class EvaluationConfig:
    smoother: str = BSPLINE
    waypoint_factor: int = 10
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    delta_d: float = 10.0
    rts_noise_ratio: float = 0.05
    fillet_radius: float = 6.0
    turning: str = "target"


class Evaluator:
    """Batch scorer for control points of one scenario and point count.

    Counts every individual it scores in ``n_evaluations``; planners derive
    their deterministic clock from that counter.
    """

    def __init__(self, scenario, n, config=None):
        self.scenario = scenario
        self.config = config or EvaluationConfig()
        self.frame = RotatedFrame.from_scenario(scenario)
        self.bounds = compute_bounds(scenario, self.frame, n, self.config.delta_d)
        self.n = n
        self.m = self.config.waypoint_factor * n
        start, end = endpoints_rotated(scenario, self.frame)
        self.start_rot = np.array(start)
        self.end_rot = np.array(end)
        self.weights = self.config.weights.as_array()
        terrain = scenario.terrain
        self._radars = [(r, threat_position(r, terrain)) for r in scenario.radars]
        self._missiles = [(t, threat_position(t, terrain)) for t in scenario.missiles]
        self.n_evaluations = 0
        self.n_calls = 0

    def waypoints(self, X):
        X = np.asarray(X, dtype=float)
        lead = X.shape[:-2]
        Q = np.concatenate(
            [
                np.broadcast_to(self.start_rot, lead + (1, 3)),
                X,
                np.broadcast_to(self.end_rot, lead + (1, 3)),
            ],
            axis=-2,
        )
        rotated = smooth_batch(
            Q,
            self.config.smoother,
            self.m,
            rts_noise_ratio=self.config.rts_noise_ratio,
            radius=self.config.fillet_radius,
        )
        world = self.frame.to_world(rotated)
        world[..., 0, :] = self.scenario.start
        world[..., -1, :] = self.scenario.target
        return world

    def objectives(self, W):
        sc = self.scenario
        radar = np.zeros(W.shape[:-2])
        for r, pos in self._radars:
            radar = radar + _radar_sum(W, r, pos, sc.uav)
        missile = np.zeros(W.shape[:-2])
        for t, pos in self._missiles:
            missile = missile + _missile_sum(W, t, pos)
        return np.stack(
            [f_length(W), f_altitude(W, sc.terrain, clip=True), radar, missile, f_turning(W, self.config.turning)],
            axis=-1,
        )

    def __call__(self, X):
        """Return ``(objectives, F, constraints)`` for control points ``(B, n, 3)``."""
        X = np.asarray(X, dtype=float)
        W = self.waypoints(X)
        objs = self.objectives(W)
        F = objs @ self.weights
        cons = eval_constraints(W, X, self.scenario, self.bounds)
        self.n_evaluations += int(np.prod(X.shape[:-2], dtype=int))
        self.n_calls += 1
        return objs, F, cons

    def report(self, X):
        objs, F, cons = self(np.asarray(X)[None])
        return EvaluationReport.from_arrays(objs[0], F[0], cons[0])


def evaluate(path, scenario, config=None):
    """Smooth one control path and score it into an :class:`EvaluationReport`."""
    config = config or EvaluationConfig()
    ev = Evaluator(scenario, path.n, config)
    return ev.report(path.points)
