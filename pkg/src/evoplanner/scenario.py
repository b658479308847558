"""Mission scenarios: noise terrain, threats, endpoints and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import (
    InvalidSpecError,
    OutOfDomainError,
    PlacementError,
    ScenarioSchemaError,
)

SCHEMA_VERSION = 1

RADAR = "radar"
MISSILE = "missile"
NFZ = "nfz"
THREAT_KINDS = (RADAR, MISSILE, NFZ)

# (radars, missiles, no-fly zones) per density preset
DENSITY_PRESETS = {
    "none": (0, 0, 0),
    "sparse": (1, 1, 1),
    "medium": (2, 2, 2),
    "more": (2, 3, 4),
    "dense": (3, 4, 6),
}

# (frequency [1/m], amplitude [m], octave seed) per relief preset
RELIEF_PRESETS = {
    "flat": ((1 / 50, 0.0, 0),),
    "basic": ((1 / 60, 14.0, 1), (1 / 25, 5.0, 2), (1 / 10, 1.5, 3)),
    "mountain": ((1 / 70, 45.0, 1), (1 / 30, 14.0, 2), (1 / 12, 3.0, 3)),
    "canyon": ((1 / 60, 38.0, 1), (1 / 25, 8.0, 2), (1 / 10, 2.0, 3)),
    "hills": ((1 / 30, 12.0, 1), (1 / 15, 7.0, 2), (1 / 7, 2.0, 3)),
}


def _fade(t):
    return t * t * (3.0 - 2.0 * t)


def _value_noise(xs, ys, frequency, rng):
    """Smoothed value noise sampled on the tensor grid ``xs`` x ``ys``."""
    gx = xs * frequency
    gy = ys * frequency
    nx = int(math.floor(gx.max())) + 2
    ny = int(math.floor(gy.max())) + 2
    lattice = rng.random((ny, nx))
    ix = np.floor(gx).astype(int)
    iy = np.floor(gy).astype(int)
    tx = _fade(gx - ix)[None, :]
    ty = _fade(gy - iy)[:, None]
    v00 = lattice[np.ix_(iy, ix)]
    v10 = lattice[np.ix_(iy, ix + 1)]
    v01 = lattice[np.ix_(iy + 1, ix)]
    v11 = lattice[np.ix_(iy + 1, ix + 1)]
    top = v00 + tx * (v10 - v00)
    bottom = v01 + tx * (v11 - v01)
    return top + ty * (bottom - top)


@dataclass(frozen=True, eq=False)
class Terrain:
    """Height samples on a regular grid with triangle interpolation.

    ``grid[j, i]`` is the height at ``(origin[0] + i * cell_size,
    origin[1] + j * cell_size)``. Every grid square is split along its
    (0, 0)-(1, 1) diagonal.
    """

    grid: np.ndarray
    cell_size: float = 1.0
    origin: tuple = (0.0, 0.0)
    noise_spec: tuple = ()

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        if grid.ndim != 2 or grid.shape[0] < 2 or grid.shape[1] < 2:
            raise InvalidSpecError("terrain grid must be at least 2x2")
        if not np.all(np.isfinite(grid)):
            raise InvalidSpecError("terrain heights must be finite")
        if not self.cell_size > 0:
            raise InvalidSpecError("cell_size must be positive")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "noise_spec", tuple(tuple(o) for o in self.noise_spec))

    @property
    def width(self):
        return self.grid.shape[1]

    @property
    def height(self):
        return self.grid.shape[0]

    @property
    def bounds(self):
        """Domain rectangle ``(x_min, x_max, y_min, y_max)``."""
        x0, y0 = self.origin
        return (
            x0,
            x0 + (self.width - 1) * self.cell_size,
            y0,
            y0 + (self.height - 1) * self.cell_size,
        )

    def contains(self, x, y):
        x_min, x_max, y_min, y_max = self.bounds
        x = np.asarray(x)
        y = np.asarray(y)
        return (x >= x_min) & (x <= x_max) & (y >= y_min) & (y <= y_max)

    def heights(self, x, y, clip=False):
        """Vectorized height lookup.

        With ``clip=True`` queries outside the domain are projected onto its
        boundary instead of raising.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x_min, x_max, y_min, y_max = self.bounds
        if clip:
            x = np.clip(x, x_min, x_max)
            y = np.clip(y, y_min, y_max)
        elif not np.all(self.contains(x, y)):
            raise OutOfDomainError("query outside terrain domain")
        gx = (x - x_min) / self.cell_size
        gy = (y - y_min) / self.cell_size
        i = np.clip(np.floor(gx).astype(int), 0, self.width - 2)
        j = np.clip(np.floor(gy).astype(int), 0, self.height - 2)
        u = gx - i
        v = gy - j
        g = self.grid
        h00 = g[j, i]
        h10 = g[j, i + 1]
        h01 = g[j + 1, i]
        h11 = g[j + 1, i + 1]
        lower = h00 + u * (h10 - h00) + v * (h11 - h10)
        upper = h00 + v * (h01 - h00) + u * (h11 - h01)
        return np.where(u >= v, lower, upper)

    def __eq__(self, other):
        if not isinstance(other, Terrain):
            return NotImplemented
        return (
            self.cell_size == other.cell_size
            and self.origin == other.origin
            and self.noise_spec == other.noise_spec
            and np.array_equal(self.grid, other.grid)
        )

    __hash__ = None


def generate_terrain(seed, domain, octaves, cell_size=1.0, base=0.0):
    """Sum of value-noise octaves over ``domain = (x_min, x_max, y_min, y_max)``.

    Parameters
    ----------
    seed : int
        Master seed; each octave draws its lattice from ``(seed, octave_seed)``.
    domain : sequence of 4 floats
    octaves : sequence of (frequency, amplitude, octave_seed)
    cell_size : float
    base : float
        Constant offset added to every sample.
    """
    octaves = [tuple(o) for o in octaves]
    if not octaves:
        raise InvalidSpecError("at least one noise octave is required")
    x_min, x_max, y_min, y_max = (float(v) for v in domain)
    if not (x_max > x_min and y_max > y_min):
        raise InvalidSpecError("terrain domain must have positive area")
    if not cell_size > 0:
        raise InvalidSpecError("cell_size must be positive")
    nx = int(round((x_max - x_min) / cell_size)) + 1
    ny = int(round((y_max - y_min) / cell_size)) + 1
    xs = np.arange(nx) * cell_size
    ys = np.arange(ny) * cell_size
    grid = np.full((ny, nx), float(base))
    for frequency, amplitude, octave_seed in octaves:
        if frequency <= 0:
            raise InvalidSpecError("octave frequency must be positive")
        rng = np.random.default_rng([int(seed), int(octave_seed)])
        noise = _value_noise(xs, ys, frequency, rng)
        grid = grid + amplitude * noise
    spec = tuple((float(f), float(a), int(s)) for f, a, s in octaves)
    return Terrain(grid, cell_size, (x_min, y_min), spec)


def map_height(terrain, x, y):
    """Ground height at a single point; raises outside the domain."""
    return float(terrain.heights(x, y))


@dataclass(frozen=True)
class Threat:
    """Radar, missile site or rectangular no-fly zone.

    Circular threats use ``center``/``radius``; a no-fly zone stores
    ``rect = (x_min, x_max, y_min, y_max)`` and derives center and radius
    (half diagonal) from it.
    """

    kind: str
    center: tuple = (0.0, 0.0)
    radius: float = 0.0
    zeta1: float = 1.0
    zeta2: float = 2e-6
    rect: tuple | None = None

    def __post_init__(self):
        if self.kind not in THREAT_KINDS:
            raise InvalidSpecError(f"unknown threat kind {self.kind!r}")
        if self.kind == NFZ:
            if self.rect is None or len(self.rect) != 4:
                raise InvalidSpecError("no-fly zone needs a rectangle")
            x0, x1, y0, y1 = (float(v) for v in self.rect)
            if not (x1 > x0 and y1 > y0):
                raise InvalidSpecError("degenerate no-fly zone rectangle")
            object.__setattr__(self, "rect", (x0, x1, y0, y1))
            object.__setattr__(self, "center", ((x0 + x1) / 2, (y0 + y1) / 2))
            object.__setattr__(self, "radius", 0.5 * math.hypot(x1 - x0, y1 - y0))
        else:
            if not self.radius > 0:
                raise InvalidSpecError("threat radius must be positive")
            if self.kind == RADAR and not (self.zeta1 > 0 and self.zeta2 > 0):
                raise InvalidSpecError("radar zeta parameters must be positive")
            object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
            object.__setattr__(self, "radius", float(self.radius))

    def contains_xy(self, x, y):
        """Inside test on the horizontal plane (rectangle or disc)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == NFZ:
            x0, x1, y0, y1 = self.rect
            return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        return np.hypot(x - self.center[0], y - self.center[1]) <= self.radius


@dataclass(frozen=True)
class UavShape:
    """Ellipsoid semi-axes used for the radar cross section."""

    a: float = 0.5
    b: float = 0.3
    c: float = 0.2

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise InvalidSpecError("UAV semi-axes must be positive")


@dataclass(frozen=True)
class Scenario:
    terrain: Terrain
    threats: tuple
    start: tuple
    target: tuple
    mission_space: tuple = ((0.0, 150.0), (0.0, 100.0))
    uav: UavShape = field(default_factory=UavShape)
    safe_height: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "threats", tuple(self.threats))
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "target", tuple(float(v) for v in self.target))
        ms = tuple(tuple(float(v) for v in r) for r in self.mission_space)
        object.__setattr__(self, "mission_space", ms)

    @property
    def radars(self):
        return [t for t in self.threats if t.kind == RADAR]

    @property
    def missiles(self):
        return [t for t in self.threats if t.kind == MISSILE]

    @property
    def nfzs(self):
        return [t for t in self.threats if t.kind == NFZ]

    def invariant_violations(self):
        """List of human-readable invariant failures; empty when valid."""
        problems = []
        (x0, x1), (y0, y1) = self.mission_space
        if not (x1 > x0 and y1 > y0):
            problems.append("mission_space is degenerate")
        if self.safe_height < 0:
            problems.append("safe_height is negative")
        if math.hypot(self.target[0] - self.start[0], self.target[1] - self.start[1]) <= 0:
            problems.append("start and target coincide horizontally")
        for name, p in (("start", self.start), ("target", self.target)):
            if not (x0 <= p[0] <= x1 and y0 <= p[1] <= y1):
                problems.append(f"{name} outside mission space")
            if not bool(self.terrain.contains(p[0], p[1])):
                problems.append(f"{name} outside terrain")
            for t in self.threats:
                if t.kind in (NFZ, MISSILE) and bool(t.contains_xy(p[0], p[1])):
                    problems.append(f"{name} inside {t.kind}")
        return problems

    def validate(self):
        problems = self.invariant_violations()
        if problems:
            raise InvalidSpecError("; ".join(problems))
        return self


@dataclass(frozen=True)
class ScenarioParams:
    """Controls for :func:`generate_scenario`.

    ``counts`` overrides the density preset with explicit
    ``(radars, missiles, nfzs)``. ``start_xy``/``target_xy`` fix the mission
    endpoints; otherwise both are drawn inside the mission space.
    """

    density: str = "sparse"
    relief: str = "basic"
    counts: tuple | None = None
    mission_space: tuple = ((0.0, 150.0), (0.0, 100.0))
    start_xy: tuple | None = None
    target_xy: tuple | None = None
    safe_height: float = 5.0
    cell_size: float = 1.0
    terrain_margin: float = 40.0
    radar_radius: tuple = (18.0, 28.0)
    missile_radius: tuple = (8.0, 14.0)
    nfz_half_size: tuple = (4.0, 10.0)
    lateral_spread: float = 14.0
    min_separation: float = 80.0
    uav: UavShape = field(default_factory=UavShape)
    max_retries: int = 200


FIXED_ENDPOINTS = {"start_xy": (0.0, 0.0), "target_xy": (100.0, 70.0)}


def _carve_canyon(terrain, start, target, width=14.0, depth=0.85):
    x_min, _, y_min, _ = terrain.bounds
    xs = x_min + np.arange(terrain.width) * terrain.cell_size
    ys = y_min + np.arange(terrain.height) * terrain.cell_size
    X, Y = np.meshgrid(xs, ys)
    sx, sy = start
    dx, dy = target[0] - sx, target[1] - sy
    length = math.hypot(dx, dy)
    # distance to the infinite start-target line
    dist = np.abs((X - sx) * dy - (Y - sy) * dx) / length
    grid = terrain.grid * (1.0 - depth * np.exp(-((dist / width) ** 2)))
    return Terrain(grid, terrain.cell_size, terrain.origin, terrain.noise_spec)


def _endpoint_ok(xy, threats, margin=2.0):
    for t in threats:
        if t.kind == NFZ:
            x0, x1, y0, y1 = t.rect
            if x0 - margin <= xy[0] <= x1 + margin and y0 - margin <= xy[1] <= y1 + margin:
                return False
        elif t.kind == MISSILE:
            if math.hypot(xy[0] - t.center[0], xy[1] - t.center[1]) <= t.radius + margin:
                return False
    return True


def generate_scenario(seed, params=None, **overrides):
    """Deterministic random scenario for ``seed``.

    Threat centers are scattered around the start-target corridor so they
    actually interact with candidate paths. Raises :class:`PlacementError`
    when safe endpoints cannot be found within ``params.max_retries`` draws.
    """
    if params is None:
        params = ScenarioParams(**overrides)
    elif overrides:
        params = ScenarioParams(**{**params.__dict__, **overrides})
    if params.relief not in RELIEF_PRESETS:
        raise InvalidSpecError(f"unknown relief preset {params.relief!r}")
    if params.counts is None:
        if params.density not in DENSITY_PRESETS:
            raise InvalidSpecError(f"unknown density preset {params.density!r}")
        counts = DENSITY_PRESETS[params.density]
    else:
        counts = tuple(int(c) for c in params.counts)
    if any(c < 0 for c in counts):
        raise InvalidSpecError("threat counts must be non-negative")

    rng = np.random.default_rng([int(seed), 0x5CE7A])
    (mx0, mx1), (my0, my1) = params.mission_space
    pad = params.terrain_margin
    terrain = generate_terrain(
        seed,
        (mx0 - pad, mx1 + pad, my0 - pad, my1 + pad),
        RELIEF_PRESETS[params.relief],
        cell_size=params.cell_size,
    )

    def draw_point(margin=0.0):
        return (
            float(rng.uniform(mx0 + margin, mx1 - margin)),
            float(rng.uniform(my0 + margin, my1 - margin)),
        )

    for _ in range(params.max_retries):
        start_xy = params.start_xy or draw_point(5.0)
        target_xy = params.target_xy or draw_point(5.0)
        if params.start_xy is None or params.target_xy is None:
            if math.hypot(target_xy[0] - start_xy[0], target_xy[1] - start_xy[1]) < params.min_separation:
                continue
        if start_xy != target_xy:
            break
    else:
        raise PlacementError("could not place distinct mission endpoints")

    if params.relief == "canyon":
        terrain = _carve_canyon(terrain, start_xy, target_xy)

    sx, sy = start_xy
    dx, dy = target_xy[0] - sx, target_xy[1] - sy
    length = math.hypot(dx, dy)
    ux, uy = dx / length, dy / length

    def corridor_point():
        s = rng.uniform(0.2, 0.8) * length
        off = rng.normal(0.0, params.lateral_spread)
        x = float(np.clip(sx + s * ux - off * uy, mx0, mx1))
        y = float(np.clip(sy + s * uy + off * ux, my0, my1))
        return x, y

    kinds = [RADAR] * counts[0] + [MISSILE] * counts[1] + [NFZ] * counts[2]
    threats = []
    for kind in kinds:
        for _ in range(params.max_retries):
            cx, cy = corridor_point()
            if kind == RADAR:
                threat = Threat(RADAR, (cx, cy), float(rng.uniform(*params.radar_radius)))
            elif kind == MISSILE:
                threat = Threat(MISSILE, (cx, cy), float(rng.uniform(*params.missile_radius)))
            else:
                hw, hh = rng.uniform(*params.nfz_half_size, size=2)
                threat = Threat(NFZ, rect=(cx - hw, cx + hw, cy - hh, cy + hh))
            if _endpoint_ok(start_xy, [threat]) and _endpoint_ok(target_xy, [threat]):
                threats.append(threat)
                break
        else:
            raise PlacementError(f"could not place {kind} clear of the mission endpoints")

    h = params.safe_height
    start = (sx, sy, float(terrain.heights(sx, sy)) + h)
    target = (target_xy[0], target_xy[1], float(terrain.heights(*target_xy)) + h)
    scenario = Scenario(
        terrain=terrain,
        threats=tuple(threats),
        start=start,
        target=target,
        mission_space=params.mission_space,
        uav=params.uav,
        safe_height=h,
    )
    return scenario.validate()


# ---------------------------------------------------------------------------
# persistence


def scenario_to_dict(scenario):
    t = scenario.terrain
    threats = []
    for th in scenario.threats:
        if th.kind == NFZ:
            threats.append({"kind": NFZ, "rect": list(th.rect)})
        elif th.kind == RADAR:
            threats.append(
                {
                    "kind": RADAR,
                    "center": list(th.center),
                    "radius": th.radius,
                    "zeta1": th.zeta1,
                    "zeta2": th.zeta2,
                }
            )
        else:
            threats.append({"kind": MISSILE, "center": list(th.center), "radius": th.radius})
    return {
        "version": SCHEMA_VERSION,
        "terrain": {
            "cell_size": t.cell_size,
            "width": t.width,
            "height": t.height,
            "origin": list(t.origin),
            "noise_spec": [list(o) for o in t.noise_spec],
            "heights": [float(v) for v in t.grid.ravel()],
        },
        "threats": threats,
        "start": list(scenario.start),
        "target": list(scenario.target),
        "mission_space": [list(r) for r in scenario.mission_space],
        "uav": {"a": scenario.uav.a, "b": scenario.uav.b, "c": scenario.uav.c},
        "safe_height": scenario.safe_height,
    }


def _require(mapping, key, where=""):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ScenarioSchemaError(f"{where}{key}", f"missing field {where}{key!r}")
    return mapping[key]


def _number(value, name, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioSchemaError(name, f"field {name!r} must be a finite number")
    if positive and not value > 0:
        raise ScenarioSchemaError(name, f"field {name!r} must be positive")
    if nonneg and value < 0:
        raise ScenarioSchemaError(name, f"field {name!r} must be non-negative")
    return float(value)


def _vector(value, name, size):
    if not isinstance(value, list) or len(value) != size:
        raise ScenarioSchemaError(name, f"field {name!r} must be a list of {size} numbers")
    return tuple(_number(v, name) for v in value)


def scenario_from_dict(doc):
    """Validate a decoded scenario document and build the :class:`Scenario`."""
    version = _require(doc, "version")
    if version != SCHEMA_VERSION:
        raise ScenarioSchemaError("version", f"unsupported scenario version {version!r}")
    tdoc = _require(doc, "terrain")
    cell = _number(_require(tdoc, "cell_size", "terrain."), "cell_size", positive=True)
    width = _require(tdoc, "width", "terrain.")
    height = _require(tdoc, "height", "terrain.")
    if not (isinstance(width, int) and isinstance(height, int) and width >= 2 and height >= 2):
        raise ScenarioSchemaError("width", "terrain width/height must be integers >= 2")
    heights = _require(tdoc, "heights", "terrain.")
    if not isinstance(heights, list) or len(heights) != width * height:
        raise ScenarioSchemaError("heights", "terrain heights must hold width*height numbers")
    grid = np.array(heights, dtype=float).reshape(height, width)
    if not np.all(np.isfinite(grid)):
        raise ScenarioSchemaError("heights", "terrain heights must be finite")
    origin = _vector(tdoc.get("origin", [0.0, 0.0]), "origin", 2)
    noise_spec = tuple(tuple(o) for o in tdoc.get("noise_spec", []))
    terrain = Terrain(grid, cell, origin, noise_spec)

    threats = []
    tlist = _require(doc, "threats")
    if not isinstance(tlist, list):
        raise ScenarioSchemaError("threats", "threats must be a list")
    for item in tlist:
        kind = _require(item, "kind", "threats[].")
        if kind not in THREAT_KINDS:
            raise ScenarioSchemaError("kind", f"unknown threat kind {kind!r}")
        if kind == NFZ:
            rect = _vector(_require(item, "rect", "threats[]."), "rect", 4)
            if not (rect[1] > rect[0] and rect[3] > rect[2]):
                raise ScenarioSchemaError("rect", "no-fly zone rectangle is degenerate")
            threats.append(Threat(NFZ, rect=rect))
            continue
        center = _vector(_require(item, "center", "threats[]."), "center", 2)
        radius = _number(_require(item, "radius", "threats[]."), "radius", positive=True)
        if kind == RADAR:
            z1 = _number(item.get("zeta1", 1.0), "zeta1", positive=True)
            z2 = _number(item.get("zeta2", 2e-6), "zeta2", positive=True)
            threats.append(Threat(RADAR, center, radius, z1, z2))
        else:
            threats.append(Threat(MISSILE, center, radius))

    start = _vector(_require(doc, "start"), "start", 3)
    target = _vector(_require(doc, "target"), "target", 3)
    ms = _require(doc, "mission_space")
    if not isinstance(ms, list) or len(ms) != 2:
        raise ScenarioSchemaError("mission_space", "mission_space must be [[x0,x1],[y0,y1]]")
    mission_space = (_vector(ms[0], "mission_space", 2), _vector(ms[1], "mission_space", 2))
    udoc = _require(doc, "uav")
    uav = UavShape(
        _number(_require(udoc, "a", "uav."), "a", positive=True),
        _number(_require(udoc, "b", "uav."), "b", positive=True),
        _number(_require(udoc, "c", "uav."), "c", positive=True),
    )
    safe_height = _number(_require(doc, "safe_height"), "safe_height", nonneg=True)
    scenario = Scenario(terrain, tuple(threats), start, target, mission_space, uav, safe_height)
    problems = scenario.invariant_violations()
    if problems:
        raise ScenarioSchemaError("start", "; ".join(problems))
    return scenario


def save_scenario(scenario, path):
    path = Path(path)
    path.write_text(json.dumps(scenario_to_dict(scenario), indent=1) + "\n")
    return path


def load_scenario(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioSchemaError("document", f"scenario file is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def scenarios_equal(a, b):
    """Field-wise equality, exact on every number."""
    return (
        a.terrain == b.terrain
        and a.threats == b.threats
        and a.start == b.start
        and a.target == b.target
        and a.mission_space == b.mission_space
        and a.uav == b.uav
        and a.safe_height == b.safe_height
    )


def reference_scenario():
    """The shipped fixture (seed 2021, 'medium' density, fixed endpoints)."""
    from importlib import resources

    with resources.as_file(resources.files(__package__) / "data" / "reference_scenario.json") as p:
        return load_scenario(p)


def make_reference_scenario():
    return generate_scenario(2021, ScenarioParams(density="medium", relief="basic", **FIXED_ENDPOINTS))
