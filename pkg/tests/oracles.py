"""Brute-force reference implementations written with scalar loops and ``math``.

They share no code with the package; tests compare the vectorised versions
against them.
"""

import math


def height(terrain, x, y):
    """Triangle interpolation with the (0,0)-(1,1) diagonal, clipped to the grid."""
    x0, y0 = terrain.origin
    h = terrain.cell_size
    nx, ny = terrain.grid.shape[1], terrain.grid.shape[0]
    x = min(max(x, x0), x0 + (nx - 1) * h)
    y = min(max(y, y0), y0 + (ny - 1) * h)
    gx, gy = (x - x0) / h, (y - y0) / h
    i = min(int(math.floor(gx)), nx - 2)
    j = min(int(math.floor(gy)), ny - 2)
    u, v = gx - i, gy - j
    g = terrain.grid
    a, b, c, d = float(g[j, i]), float(g[j, i + 1]), float(g[j + 1, i]), float(g[j + 1, i + 1])
    if u >= v:
        # triangle (0,0) (1,0) (1,1)
        return a + u * (b - a) + v * (d - b)
    # triangle (0,0) (0,1) (1,1)
    return a + v * (c - a) + u * (d - c)


def dist(p, q):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))


def f1(w):
    return sum(dist(w[k], w[k + 1]) for k in range(len(w) - 1)) / dist(w[0], w[-1])


def f2(w, terrain):
    m = len(w)
    total = 0.0
    for p in w[1:]:
        c = p[2] - height(terrain, p[0], p[1])
        if c > 0:
            total += c / m
    return total


def rcs(psi, phi, a, b, c):
    s = (a * math.sin(psi) * math.cos(phi)) ** 2 + (b * math.sin(psi) * math.sin(phi)) ** 2
    s += (c * math.cos(psi)) ** 2
    return math.pi * a * a * b * b * c * c / max(s * s, 1e-12)


def p_radar(d, psi, phi, radar, uav):
    if d > radar.radius:
        return 0.0
    sigma = rcs(psi, phi, uav.a, uav.b, uav.c)
    return 1.0 / (1.0 + radar.zeta2 * (d**4 / sigma) ** radar.zeta1)


def p_missile(d, R):
    if d > R:
        return 0.0
    return R**4 / (R**4 + d**4)


def ground_pos(threat, terrain):
    x, y = threat.center
    return (x, y, height(terrain, x, y))


def radar_angles(prev, cur, pos):
    v = [c - p for c, p in zip(cur, prev)]
    r = [q - c for q, c in zip(pos, cur)]
    d = math.sqrt(sum(t * t for t in r))
    vn = math.sqrt(sum(t * t for t in v))
    if vn * d > 0:
        cos = sum(a * b for a, b in zip(v, r)) / (vn * d)
        psi = math.acos(min(1.0, max(-1.0, cos)))
    else:
        psi = 0.0
    az = math.atan2(r[1], r[0]) - math.atan2(v[1], v[0])
    el = math.atan2(r[2], math.hypot(r[0], r[1]))
    s = math.sin(az)
    if s >= 0:
        s = max(s, 1e-12)
    else:
        s = min(s, -1e-12)
    phi = -math.atan(math.tan(el) / s)
    return d, psi, phi


def f3(w, scenario):
    total = 0.0
    for radar in scenario.radars:
        pos = ground_pos(radar, scenario.terrain)
        for k in range(1, len(w)):
            d = dist(w[k], pos)
            if d > radar.radius:
                continue
            d, psi, phi = radar_angles(w[k - 1], w[k], pos)
            total += p_radar(d, psi, phi, radar, scenario.uav)
    return total


def f4(w, scenario):
    total = 0.0
    for m in scenario.missiles:
        pos = ground_pos(m, scenario.terrain)
        for k in range(1, len(w)):
            total += p_missile(dist(w[k], pos), m.radius)
    return total


def f5(w):
    total = 0.0
    tx, ty = w[-1][0], w[-1][1]
    for k in range(1, len(w)):
        ax, ay = w[k][0] - w[k - 1][0], w[k][1] - w[k - 1][1]
        bx, by = tx - w[k][0], ty - w[k][1]
        den = math.hypot(ax, ay) * math.hypot(bx, by)
        if den > 0:
            total += math.acos(min(1.0, max(-1.0, (ax * bx + ay * by) / den)))
    return total


def alpha(z):
    return -1.5377e-10 * z * z - 2.6997e-5 * z + 0.4211


def beta(z):
    return 2.5063e-9 * z * z - 6.3014e-6 * z - 0.3257


def _slope(p, q):
    run = math.hypot(q[0] - p[0], q[1] - p[1])
    dz = q[2] - p[2]
    if run > 0:
        return dz / run
    return math.copysign(1e6, dz) if dz != 0 else 0.0


def g1(w):
    return max(_slope(w[k], w[k + 1]) - alpha(w[k][2]) for k in range(len(w) - 1))


def g2(w):
    return max(beta(w[k][2]) - _slope(w[k], w[k + 1]) for k in range(len(w) - 1))


def g3(w, scenario):
    inner = w[1:-1]
    return scenario.safe_height - min(p[2] - height(scenario.terrain, p[0], p[1]) for p in inner)


def h1(w, scenario):
    hits = 0
    for p in w:
        for z in scenario.nfzs:
            x0, x1, y0, y1 = z.rect
            if x0 <= p[0] <= x1 and y0 <= p[1] <= y1:
                hits += 1
                break
    return hits


def h2(ctrl, bounds):
    bad = 0
    for i, p in enumerate(ctrl):
        lo, hi = bounds.x_windows[i]
        if not (lo <= p[0] <= hi) or not (bounds.y_min <= p[1] <= bounds.y_max):
            bad += 1
    return bad


def random_paths(scenario, rng, count, m=5):
    """Random ``(count, m, 3)`` paths; half the points land near a threat."""
    (x0, x1), (y0, y1) = scenario.mission_space
    threats = [t for t in scenario.threats if t.kind != "nfz"] or list(scenario.threats)
    out = []
    for _ in range(count):
        pts = []
        for _k in range(m):
            if threats and rng.random() < 0.5:
                t = threats[rng.integers(len(threats))]
                ang = rng.uniform(0, 2 * math.pi)
                r = rng.uniform(0, 1.2 * t.radius)
                x = min(max(t.center[0] + r * math.cos(ang), x0), x1)
                y = min(max(t.center[1] + r * math.sin(ang), y0), y1)
            else:
                x, y = rng.uniform(x0, x1), rng.uniform(y0, y1)
            z = height(scenario.terrain, x, y) + rng.uniform(-5.0, 30.0)
            pts.append((x, y, z))
        out.append(pts)
    return out


def close(a, b, rel=1e-12, abs_=1e-12):
    return math.isclose(float(a), float(b), rel_tol=rel, abs_tol=abs_)
