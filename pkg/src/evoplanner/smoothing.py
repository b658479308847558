"""Control-point to waypoint smoothers.

Bezier, B-spline and RTS are linear in the control points, so each is a
cached ``(m, n + 2)`` matrix applied to the full control sequence. The
tangent-circle smoother is geometric and evaluated in batch.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.special import comb

from .exceptions import InvalidSpecError
from .pathmodel import ControlPath, Waypoints

BEZIER = "Bezier"
BSPLINE = "BSpline"
RTS = "RTS"
TANGENT_CIRCLE = "TangentCircle"
METHODS = (BEZIER, BSPLINE, RTS, TANGENT_CIRCLE)


def _split_intervals(total, pieces):
    """Spread ``total`` sample intervals over ``pieces`` as evenly as possible."""
    base, extra = divmod(total, pieces)
    return [base + (k < extra) for k in range(pieces)]


def _piece_params(m, pieces):
    """(piece index, local parameter in [0, 1]) for m samples, ends included."""
    counts = _split_intervals(m - 1, pieces)
    idx, loc = [], []
    for k, c in enumerate(counts):
        t = np.arange(c) / c
        idx.extend([k] * c)
        loc.extend(t)
    idx.append(pieces - 1)
    loc.append(1.0)
    return np.array(idx), np.array(loc)


@lru_cache(maxsize=64)
def bezier_matrix(n, m):
    """Chained degree-6 Bezier windows, one per interior control point.

    Window k runs from the midpoint before control point k to the midpoint
    after it (the path ends for the outer windows); its seven Bezier points
    are the two ends, the corner and four points at thirds of both legs.
    """
    size = n + 2
    eye = np.eye(size)
    windows = []
    for k in range(1, n + 1):
        p0 = eye[0] if k == 1 else 0.5 * (eye[k - 1] + eye[k])
        p3 = eye[k]
        p6 = eye[n + 1] if k == n else 0.5 * (eye[k] + eye[k + 1])
        p1 = p0 + (p3 - p0) / 3.0
        p2 = p0 + 2.0 * (p3 - p0) / 3.0
        p4 = p3 + (p6 - p3) / 3.0
        p5 = p3 + 2.0 * (p6 - p3) / 3.0
        windows.append(np.stack([p0, p1, p2, p3, p4, p5, p6]))
    idx, t = _piece_params(m, n)
    j = np.arange(7)
    basis = comb(6, j) * t[:, None] ** j * (1.0 - t[:, None]) ** (6 - j)
    W = np.stack(windows)[idx]  # (m, 7, size)
    return np.einsum("mj,mjs->ms", basis, W)


@lru_cache(maxsize=64)
def bspline_matrix(n, m):
    """Cubic B-spline interpolating the start, every segment midpoint and the target.

    Sites use a uniform parameter so the whole map stays linear; samples land
    on every site parameter, so midpoints are hit up to round-off.
    """
    size = n + 2
    eye = np.eye(size)
    sites = [eye[0]] + [0.5 * (eye[k] + eye[k + 1]) for k in range(size - 1)] + [eye[-1]]
    S = np.stack(sites)  # (n + 3, size)
    u = np.arange(S.shape[0], dtype=float)
    spline = make_interp_spline(u, np.eye(S.shape[0]), k=3)
    idx, t = _piece_params(m, S.shape[0] - 1)
    B = spline(idx + t)
    return B @ S


def _linear_upsample_matrix(size, m):
    idx, t = _piece_params(m, size - 1)
    U = np.zeros((m, size))
    rows = np.arange(m)
    U[rows, idx] = 1.0 - t
    U[rows, idx + 1] += t
    return U


@lru_cache(maxsize=64)
def rts_matrix(n, m, noise_ratio=0.05):
    """Constant-velocity Kalman filter plus Rauch-Tung-Striebel backward pass.

    The control polygon is first resampled to m points; those samples are the
    measurements. ``noise_ratio`` is process over measurement variance. Both
    endpoints are near-exact measurements.
    """
    size = n + 2
    U = _linear_upsample_matrix(size, m)
    F = np.array([[1.0, 1.0], [0.0, 1.0]])
    Q = noise_ratio * np.array([[1.0 / 3.0, 0.5], [0.5, 1.0]])
    H = np.array([[1.0, 0.0]])
    R = np.ones(m)
    R[0] = R[-1] = 1e-10
    # state means are linear in the measurement vector: track coefficient rows
    means = np.zeros((m, 2, m))
    covs = np.zeros((m, 2, 2))
    pred_means = np.zeros((m, 2, m))
    pred_covs = np.zeros((m, 2, 2))
    mean = np.zeros((2, m))
    cov = np.diag([1e8, 1e8])
    for k in range(m):
        if k > 0:
            mean = F @ mean
            cov = F @ cov @ F.T + Q
        pred_means[k] = mean
        pred_covs[k] = cov
        s = (H @ cov @ H.T)[0, 0] + R[k]
        gain = (cov @ H.T)[:, 0] / s
        innov = -(H @ mean)[0]
        innov[k] += 1.0
        mean = mean + np.outer(gain, innov)
        cov = cov - np.outer(gain, H @ cov)
        means[k] = mean
        covs[k] = cov
    smoothed = means.copy()
    for k in range(m - 2, -1, -1):
        C = covs[k] @ F.T @ np.linalg.inv(pred_covs[k + 1])
        smoothed[k] = means[k] + C @ (smoothed[k + 1] - pred_means[k + 1])
    L = smoothed[:, 0, :]
    # reproduce constants exactly; the CV model already reproduces lines
    L = L / L.sum(axis=1, keepdims=True)
    return L @ U


def _linear_matrix(method, n, m, rts_noise_ratio):
    if method == BEZIER:
        return bezier_matrix(n, m)
    if method == BSPLINE:
        return bspline_matrix(n, m)
    return rts_matrix(n, m, rts_noise_ratio)


def tangent_circle_batch(Q, m, radius=6.0):
    """Polyline with circular fillets of ``radius`` at each interior vertex.

    ``Q`` is ``(B, k, 3)``; fillets shrink where a leg is too short so
    neighbouring arcs never overlap. Samples are uniform in arc length.
    """
    Q = np.asarray(Q, dtype=float)
    B, k, _ = Q.shape
    seg = np.diff(Q, axis=1)  # (B, k-1, 3)
    seg_len = np.linalg.norm(seg, axis=-1)
    safe_len = np.where(seg_len > 0, seg_len, 1.0)
    unit = seg / safe_len[..., None]
    u_in = unit[:, :-1]
    u_out = unit[:, 1:]
    cosang = np.clip(np.sum(u_in * u_out, axis=-1), -1.0, 1.0)
    phi = np.arccos(cosang)  # turning angle at interior vertices
    phi = np.where((seg_len[:, :-1] > 0) & (seg_len[:, 1:] > 0), phi, 0.0)
    phi = np.minimum(phi, np.pi - 1e-6)
    tan_half = np.tan(phi / 2.0)
    tangent = radius * tan_half
    limit = 0.5 * np.minimum(seg_len[:, :-1], seg_len[:, 1:])
    tangent = np.minimum(tangent, limit)
    curved = phi > 1e-9
    r_eff = np.where(curved, tangent / np.where(curved, tan_half, 1.0), 0.0)
    V = Q[:, 1:-1]
    A = V - u_in * tangent[..., None]
    C = V + u_out * tangent[..., None]
    arc_len = r_eff * phi

    # pieces: line0, arc1, line1, arc2, ..., arc_{k-2}, line_{k-2}
    line_start = np.concatenate([Q[:, :1], C], axis=1)  # (B, k-1, 3)
    line_end = np.concatenate([A, Q[:, -1:]], axis=1)
    line_len = np.linalg.norm(line_end - line_start, axis=-1)
    n_int = k - 2
    piece_len = np.zeros((B, 2 * n_int + 1))
    piece_len[:, 0::2] = line_len
    piece_len[:, 1::2] = arc_len
    cum = np.concatenate([np.zeros((B, 1)), np.cumsum(piece_len, axis=1)], axis=1)
    total = cum[:, -1]
    s = total[:, None] * np.linspace(0.0, 1.0, m)[None, :]
    piece = np.sum(cum[:, None, 1:-1] <= s[:, :, None], axis=-1)  # (B, m)
    piece = np.minimum(piece, 2 * n_int)
    start_s = np.take_along_axis(cum, piece, axis=1)
    plen = np.take_along_axis(piece_len, piece, axis=1)
    local = np.where(plen > 0, (s - start_s) / np.where(plen > 0, plen, 1.0), 0.0)
    local = np.clip(local, 0.0, 1.0)

    out = np.empty((B, m, 3))
    is_line = piece % 2 == 0
    li = np.minimum(piece // 2, n_int)
    ls = np.take_along_axis(line_start, li[..., None], axis=1)
    le = np.take_along_axis(line_end, li[..., None], axis=1)
    line_pts = ls + (le - ls) * local[..., None]

    ai = np.clip((piece - 1) // 2, 0, max(n_int - 1, 0))
    if n_int > 0:
        a_pts = np.take_along_axis(A, ai[..., None], axis=1)
        c_pts = np.take_along_axis(C, ai[..., None], axis=1)
        v_pts = np.take_along_axis(V, ai[..., None], axis=1)
        ang = np.take_along_axis(phi, ai, axis=1)
        rr = np.take_along_axis(r_eff, ai, axis=1)
        bis = (a_pts + c_pts) / 2.0 - v_pts
        bis_norm = np.linalg.norm(bis, axis=-1, keepdims=True)
        bis_unit = bis / np.where(bis_norm > 0, bis_norm, 1.0)
        half = ang / 2.0
        dist = np.where(np.cos(half) > 0, rr / np.maximum(np.cos(half), 1e-12), 0.0)
        center = v_pts + bis_unit * dist[..., None]
        ea = a_pts - center
        ec = c_pts - center
        sin_ang = np.sin(ang)
        ok = sin_ang > 1e-12
        w0 = np.where(ok, np.sin((1.0 - local) * ang) / np.where(ok, sin_ang, 1.0), 1.0 - local)
        w1 = np.where(ok, np.sin(local * ang) / np.where(ok, sin_ang, 1.0), local)
        arc_pts = center + w0[..., None] * ea + w1[..., None] * ec
        out[:] = np.where(is_line[..., None], line_pts, arc_pts)
    else:
        out[:] = line_pts
    return out


def smooth_batch(Q, method, m, rts_noise_ratio=0.05, radius=6.0):
    """Smooth ``(B, n + 2, 3)`` full control sequences into ``(B, m, 3)``."""
    Q = np.asarray(Q, dtype=float)
    size = Q.shape[-2]
    n = size - 2
    if method not in METHODS:
        raise InvalidSpecError(f"unknown smoother {method!r}")
    if method in (BEZIER, BSPLINE) and n < 4:
        raise InvalidSpecError(f"{method} needs at least 4 control points")
    if n < 2:
        raise InvalidSpecError("need at least 2 control points")
    if m < max(n, 2):
        raise InvalidSpecError("waypoint count must be at least the control point count")
    if method == TANGENT_CIRCLE:
        out = tangent_circle_batch(Q.reshape(-1, size, 3), m, radius).reshape(*Q.shape[:-2], m, 3)
    else:
        M = _linear_matrix(method, n, m, rts_noise_ratio)
        out = np.matmul(M, Q)
    out[..., 0, :] = Q[..., 0, :]
    out[..., -1, :] = Q[..., -1, :]
    return out


def smooth(path: ControlPath, method, m, frame, scenario=None, **kwargs):
    """Smooth one control path into world-frame :class:`Waypoints`.

    When ``scenario`` is given its start and target are copied verbatim onto
    the first and last waypoint; otherwise the transformed endpoints are used.
    """
    rotated = smooth_batch(path.full()[None], method, m, **kwargs)[0]
    world = frame.to_world(rotated)
    if scenario is not None:
        world[0] = scenario.start
        world[-1] = scenario.target
    return Waypoints(world)
