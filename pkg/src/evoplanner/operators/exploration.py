"""Exploration operators: mutations, PUS, SGWO and CINF."""

from __future__ import annotations

import numpy as np

from ..exceptions import ConfigError, InvalidSpecError
from .population import better

UM = "UM"
NUM = "NUM"
GM = "GM"
CM = "CM"
MUTATIONS = (UM, NUM, GM, CM)


def mutate_array(X, variant, params, rng, bounds=None):
    """Gene-wise mutation of a ``(..., n, 3)`` array.

    Each gene mutates with probability ``P_m``. UM redraws inside the gene's
    box, NUM moves toward a box edge with an amplitude that vanishes at
    ``t = T``, GM adds ``Normal(0, scale)`` and CM a Cauchy draw of ``scale``.
    """
    params = dict(params or {})
    p_m = params.get("P_m", 0.1)
    if not 0.0 <= p_m <= 1.0:
        raise InvalidSpecError("mutation probability must lie in [0, 1]")
    X = np.array(X, dtype=float)
    gate = rng.random(X.shape) < p_m
    scale = params.get("scale", 1.0)
    if variant == UM:
        lo = np.broadcast_to(bounds.lower, X.shape)
        hi = np.broadcast_to(bounds.upper, X.shape)
        new = rng.uniform(lo, hi)
    elif variant == NUM:
        t, T = params.get("t", 0), params.get("T", 1)
        if T <= 0:
            raise ConfigError("generation budget T must be positive")
        b = params.get("b", 2.0)
        lo = np.broadcast_to(bounds.lower, X.shape)
        hi = np.broadcast_to(bounds.upper, X.shape)
        shrink = 1.0 - rng.random(X.shape) ** ((1.0 - min(t / T, 1.0)) ** b)
        up = rng.random(X.shape) < 0.5
        new = np.where(up, X + (hi - X) * shrink, X - (X - lo) * shrink)
    elif variant == GM:
        new = X + rng.normal(0.0, scale, X.shape)
    elif variant == CM:
        new = X + scale * rng.standard_cauchy(X.shape)
    else:
        raise ConfigError(f"unknown mutation {variant!r}")
    return np.where(gate, new, X)


def mutate(ind, variant, params, rng, bounds=None):
    """Mutate one control-point array (or an :class:`Individual` path)."""
    X = getattr(ind, "path", ind)
    return mutate_array(X, variant, params, rng, bounds)


def mutation_step(pop, ctx, variant=GM, params=None):
    params = dict(params or {})
    params.setdefault("t", pop.t)
    params.setdefault("T", pop.T)
    params["scale"] = params.get("scale", 1.0) * ctx.scale
    X = mutate_array(pop.X, variant, params, ctx.rng, ctx.bounds)
    pop.set_positions(ctx.clamp(X))
    return pop


# -- population updating strategy ----------------------------------------


def pus_step(pop, ctx, params=None):
    """Rebuild the worse half around the better half, pairing best with worst."""
    params = dict(params or {})
    a = params.get("a", 1.0) * ctx.scale
    order = pop.order()
    half = pop.size // 2
    good = order[:half]
    bad = order[::-1][:half]
    X = pop.X.copy()
    r = ctx.rng.uniform(-1.0, 1.0, (half,) + X.shape[1:])
    X[bad] = pop.X[good] + a * r
    pop.V[bad] = pop.V[good]
    pop.set_positions(ctx.clamp(X))
    return pop


# -- simplified grey wolf -------------------------------------------------


def sgwo_update(P, G, a, r_C, r_A):
    C = 2.0 * r_C
    A = (2.0 * r_A - 1.0) * a
    D = np.abs(C * G - P)
    return P - A * D


def sgwo_step(pop, ctx, params=None):
    if pop.T <= 0:
        raise ConfigError("generation budget T must be positive")
    a = 2.0 - 2.0 * min(pop.t / pop.T, 1.0)
    r_C = ctx.rng.random(pop.X.shape)
    r_A = ctx.rng.random(pop.X.shape)
    if a == 0.0:
        return pop
    X = sgwo_update(pop.X, pop.gbest_X, a, r_C, r_A)
    pop.set_positions(ctx.clamp(X))
    return pop


# -- collective information ----------------------------------------------


def collective_weights(m):
    """Linearly decaying weights over the m best members, summing to 1."""
    k = np.arange(1, m + 1, dtype=float)
    return (m - k + 1.0) / (m * (m + 1) / 2.0)


def update_cuu(pop, prev_F, prev_cons):
    """Reset the counter of members that improved, increment the rest."""
    improved = better(pop.F, pop.cons, prev_F, prev_cons)
    pop.cuu = np.where(improved, 0, pop.cuu + 1)
    return improved


def cinf_step(pop, ctx, params=None):
    """Rebuild stagnant members from a weighted blend of the current leaders.

    A member whose counter exceeds ``threshold`` draws ``m`` from 1 to its
    1-based rank, blends the ``m`` best members and takes each gene from that
    blend unless ``r <= a`` or the gene is the forced keep index.
    """
    params = dict(params or {})
    threshold = params.get("threshold", 3)
    a = params.get("a", 0.3)
    stale = np.flatnonzero(pop.cuu > threshold)
    if stale.size == 0:
        return pop
    order = pop.order()
    pos = np.empty(pop.size, dtype=int)
    pos[order] = np.arange(pop.size)
    X = pop.X.copy()
    L = pop.dim
    for i in stale:
        m = int(ctx.rng.integers(1, pos[i] + 2))
        w = collective_weights(m)
        blend = np.tensordot(w, pop.X[order[:m]], axes=1)
        keep = ctx.rng.random(L) <= a
        keep[ctx.rng.integers(0, L)] = True
        X[i] = np.where(keep, X[i].ravel(), blend.ravel()).reshape(X.shape[1:])
    pop.cuu[stale] = 0
    pop.set_positions(ctx.clamp(X))
    return pop
