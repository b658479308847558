"""Exploitation operators: crossover, swarm, safari, commensalism and DE."""

from __future__ import annotations

import numpy as np

from ..exceptions import ConfigError, InvalidSpecError
from .population import flat, not_worse, rank_order

NPX = "nPX"
UX = "UX"
AX = "AX"
CROSSOVERS = (NPX, UX, AX)


# -- crossover -------------------------------------------------------------


def crossover(parent_a, parent_b, variant=NPX, params=None, rng=None):
    """Recombine two control-point arrays of equal shape.

    Genes are the flattened coordinates. nPX swaps alternate blocks between
    ``params['points']`` cut positions (or explicit ``params['cuts']``), UX
    swaps each gene with probability ``CR`` and AX mixes with
    ``lam1``/``lam2``.
    """
    a = np.asarray(parent_a, dtype=float)
    b = np.asarray(parent_b, dtype=float)
    if a.shape != b.shape:
        raise InvalidSpecError("parents must have the same number of control points")
    params = dict(params or {})
    ga, gb = a.ravel(), b.ravel()
    L = ga.size
    if variant == NPX:
        cuts = params.get("cuts")
        if cuts is None:
            k = int(min(max(params.get("points", 1), 1), L - 1))
            cuts = np.sort(rng.choice(np.arange(1, L), size=k, replace=False))
        mask = np.zeros(L, dtype=bool)
        edges = list(cuts) + [L]
        for j in range(0, len(edges) - 1, 2):
            mask[edges[j] : edges[j + 1]] = True
    elif variant == UX:
        mask = rng.random(L) < params.get("CR", 0.5)
    elif variant == AX:
        lam1 = params.get("lam1")
        if lam1 is None:
            lam1 = rng.random()
        lam2 = params.get("lam2", 1.0 - lam1)
        return (lam1 * a + lam2 * b), (lam2 * a + lam1 * b)
    else:
        raise ConfigError(f"unknown crossover {variant!r}")
    ca = np.where(mask, gb, ga).reshape(a.shape)
    cb = np.where(mask, ga, gb).reshape(a.shape)
    return ca, cb


def crossover_step(pop, ctx, variant=NPX, params=None, twins=True, rate=0.9):
    """Pair consecutive members and recombine them.

    With ``twins`` both children replace their parents; otherwise only the
    first child survives and the second parent is kept.
    """
    X = pop.X.copy()
    for i in range(0, pop.size - 1, 2):
        if ctx.rng.random() >= rate:
            continue
        ca, cb = crossover(X[i], X[i + 1], variant, params, ctx.rng)
        X[i] = ca
        if twins:
            X[i + 1] = cb
    pop.set_positions(ctx.clamp(X))
    return pop


# -- particle swarm --------------------------------------------------------


def pso_coefficients(t, T, c_max=2.5, c_min=0.5):
    """Time-varying cognitive and social factors (c1 falls, c2 rises)."""
    if T <= 0:
        raise ConfigError("generation budget T must be positive")
    frac = t / T
    return c_max - (c_max - c_min) * frac, c_min + (c_max - c_min) * frac


def pso_step(pop, ctx, params=None):
    params = dict(params or {})
    w = params.get("w", 0.7)
    c1, c2 = pso_coefficients(pop.t, pop.T, params.get("c_max", 2.5), params.get("c_min", 0.5))
    rng = ctx.rng
    r1 = rng.random(pop.X.shape)
    r2 = rng.random(pop.X.shape)
    V = w * pop.V + c1 * r1 * (pop.pbest_X - pop.X) + c2 * r2 * (pop.gbest_X - pop.X)
    vmax = params.get("v_max")
    if vmax is not None and ctx.bounds is not None:
        lim = vmax * ctx.span
        V = np.clip(V, -lim, lim)
    pop.V = V
    pop.set_positions(ctx.clamp(pop.X + V))
    return pop


# -- safari (wolf pack) ----------------------------------------------------


def move_toward(X, target, step):
    """Move every row of ``X`` by ``step`` along its unit vector to ``target``."""
    d = flat(np.asarray(target, dtype=float) - X)
    norm = np.linalg.norm(d, axis=1, keepdims=True)
    unit = np.divide(d, norm, out=np.zeros_like(d), where=norm > 0)
    return X + (step * unit).reshape(X.shape)


def safari_step(pop, ctx, params=None):
    """Scout around the leaders, then move the pack toward the best scout.

    The top ``frac`` of members are perturbed with Gaussian noise of
    ``sigma`` metres; the best of the scouts and the current global best
    becomes the pack leader for this step.
    """
    params = dict(params or {})
    step = params.get("step", 2.0) * ctx.scale
    frac = params.get("frac", 0.2)
    sigma = params.get("sigma", 1.0) * ctx.scale
    pop.require_evaluated()
    order = pop.order()
    k = max(1, int(round(frac * pop.size)))
    scouts = pop.X[order[:k]] + ctx.rng.normal(0.0, 1.0, (k,) + pop.X.shape[1:]) * sigma
    scouts = ctx.clamp(scouts)
    leader = pop.gbest_X
    if sigma > 0 and ctx.evaluate is not None:
        objs, F, cons = ctx.evaluate(scouts)
        b = int(rank_order(F, cons)[0])
        # the scout leads only when it beats the global best, which it then replaces
        if pop.offer_gbest(scouts[b], F[b], cons[b], objs[b]):
            leader = scouts[b]
    pop.set_positions(ctx.clamp(move_toward(pop.X, leader, step)))
    return pop


# -- commensalism ----------------------------------------------------------


def commensalism_pair(Pi, Pj, G, r):
    """Both updates use the pre-step positions and the same ``r``."""
    return Pi + r * (G - Pj), Pj + r * (G - Pi)


def commensalism_step(pop, ctx, params=None):
    if pop.size < 2:
        raise InvalidSpecError("commensalism needs at least 2 members")
    perm = ctx.rng.permutation(pop.size)
    X = pop.X.copy()
    G = pop.gbest_X
    for i, j in zip(perm[0::2], perm[1::2]):
        r = ctx.rng.uniform(-1.0, 1.0, X.shape[1:])
        X[i], X[j] = commensalism_pair(pop.X[i], pop.X[j], G, r)
    pop.set_positions(ctx.clamp(X))
    return pop


# -- differential evolution ------------------------------------------------

DE_RAND = "rand"
DE_BEST = "best"


def de_donors(X, G, variant, F, rng):
    N = X.shape[0]
    need = 4 if variant == DE_RAND else 3
    if N < need:
        raise InvalidSpecError(f"DE/{variant} needs at least {need} members")
    # rand needs a base plus a difference pair, best only the pair
    idx = np.empty((N, need - 1), dtype=int)
    for i in range(N):
        others = np.delete(np.arange(N), i)
        idx[i] = rng.choice(others, size=need - 1, replace=False)
    base = X[idx[:, 0]] if variant == DE_RAND else np.broadcast_to(G, X.shape)
    return base + F * (X[idx[:, -2]] - X[idx[:, -1]])


def binomial_crossover(X, donors, CR, rng):
    N = X.shape[0]
    fx, fd = flat(X), flat(donors)
    L = fx.shape[1]
    mask = rng.random((N, L)) <= CR
    mask[np.arange(N), rng.integers(0, L, size=N)] = True
    return np.where(mask, fd, fx).reshape(X.shape)


def de_step(pop, ctx, variant=DE_RAND, params=None):
    """Donor, binomial trial, then greedy replacement (better-or-equal wins)."""
    if variant not in (DE_RAND, DE_BEST):
        raise ConfigError(f"unknown DE variant {variant!r}")
    params = dict(params or {})
    F = params.get("F", 0.5)
    CR = params.get("CR", 0.9)
    pop.require_evaluated()
    donors = de_donors(pop.X, pop.gbest_X, variant, F, ctx.rng)
    trial = ctx.clamp(binomial_crossover(pop.X, donors, CR, ctx.rng))
    objs, Ft, cons = ctx.evaluate(trial)
    win = not_worse(Ft, cons, pop.F, pop.cons)
    pop.X[win] = trial[win]
    pop.set_reports(win, objs[win], Ft[win], cons[win])
    return pop
