"""Population-maintenance operators.

Cellular mating, injection, antibody damping and decay are simplified
variants; runs that enable them list them under ``simplified`` metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .population import better, flat, rank_order

SIMPLIFIED = ("Cellular", "Injection", "Antibody", "Decay")


def elite_indices(pop, fraction, order=None):
    """Top ``ceil(fraction * N)`` members, best first (none when fraction is 0)."""
    if fraction <= 0:
        return np.zeros(0, dtype=int)
    order = pop.order() if order is None else np.asarray(getattr(order, "permutation", order))
    k = min(pop.size, int(math.ceil(fraction * pop.size - 1e-9)))
    return order[:k]


def reinsert_elites(pop, elites):
    """Overwrite the worst members with stored elites (a population slice)."""
    if elites is None or elites.size == 0:
        return pop
    worst = pop.order()[::-1][: elites.size]
    for name in ("X", "V", "F", "cons", "objs", "pbest_X", "pbest_F", "pbest_cons", "cuu"):
        getattr(pop, name)[worst] = getattr(elites, name)
    return pop


def repair(pop, ctx, iterations=3, step=None):
    """Greedy nudges on infeasible members, accepted only when they help.

    Each round tries raising the whole path and shifting one random control
    point sideways; a move survives only if the member's ordering improves.
    """
    pop.require_evaluated()
    bad = np.flatnonzero(~pop.feasible)
    if bad.size == 0 or ctx.evaluate is None:
        return pop
    step = ctx.bounds.delta_l / 4.0 if step is None else step
    for _ in range(iterations):
        X = pop.X[bad].copy()
        lift = X.copy()
        lift[..., 2] += step
        side = X.copy()
        j = ctx.rng.integers(0, X.shape[1], size=bad.size)
        side[np.arange(bad.size), j, 1] += ctx.rng.choice([-step, step], size=bad.size)
        for cand in (ctx.clamp(lift), ctx.clamp(side)):
            objs, F, cons = ctx.evaluate(cand)
            win = better(F, cons, pop.F[bad], pop.cons[bad])
            idx = bad[win]
            pop.X[idx] = cand[win]
            pop.set_reports(idx, objs[win], F[win], cons[win])
    return pop


def pfih(pop, ctx, iterations=1, members=1):
    """Local improvement on the best members by pulling each control point
    toward the midpoint of its neighbours; never worsens a report."""
    if iterations <= 0 or ctx.evaluate is None:
        return pop
    pop.require_evaluated()
    for _ in range(iterations):
        idx = pop.order()[:members]
        X = pop.X[idx]
        n = X.shape[1]
        cands = []
        for j in range(n):
            c = X.copy()
            if j > 0:
                left = X[:, j - 1]
            else:
                left = X[:, j] if ctx.anchors is None else np.asarray(ctx.anchors[0])
            if j < n - 1:
                right = X[:, j + 1]
            else:
                right = X[:, j] if ctx.anchors is None else np.asarray(ctx.anchors[1])
            c[:, j] = 0.5 * X[:, j] + 0.25 * (left + right)
            cands.append(c)
        C = ctx.clamp(np.concatenate(cands))
        objs, F, cons = ctx.evaluate(C)
        for r, i in enumerate(idx):
            rows = np.arange(r, C.shape[0], len(idx))
            b = rows[rank_order(F[rows], cons[rows])[0]]
            if better(F[b], cons[b], pop.F[i], pop.cons[i]):
                pop.X[i] = C[b]
                pop.set_reports(i, objs[b], F[b], cons[b])
    return pop


def migrate(pops, t, interval, log=None):
    """Ring migration: each population's best replaces the next one's worst."""
    if len(pops) < 2:
        if log is not None:
            log.append("migration skipped: single population")
        return pops
    if interval <= 0 or t % interval:
        return pops
    best = [p.best_index() for p in pops]
    snapshots = [(p.X[b].copy(), p.F[b], p.cons[b].copy(), p.objs[b].copy()) for p, b in zip(pops, best)]
    for k, p in enumerate(pops):
        X, F, cons, objs = snapshots[k - 1]
        w = int(p.order()[-1])
        p.X[w] = X
        p.set_reports(w, objs, F, cons)
    return pops


def cellular_pool(order, rng, size=None):
    """Mating pool where each cell pairs with its best von Neumann neighbour.

    Members sit on a torus of width ``ceil(sqrt(N))``; the pool lists every
    cell followed by its chosen mate.
    """
    perm = np.asarray(getattr(order, "permutation", order))
    N = perm.size
    pos = np.empty(N, dtype=int)
    pos[perm] = np.arange(N)
    width = int(math.ceil(math.sqrt(N)))
    cells = rng.permutation(N)
    pool = []
    for c in range(N):
        r, q = divmod(c, width)
        neigh = [((r + dr) * width + (q + dq) % width) % N for dr, dq in ((-1, 0), (1, 0), (0, -1), (0, 1))]
        mates = cells[neigh]
        pool.extend([cells[c], mates[np.argmin(pos[mates])]])
    pool = np.array(pool)
    return pool if size is None else pool[:size]


def inject(pop, rate, make, rng):
    """Append ``ceil(rate * N)`` fresh members built by ``make(k, rng)``."""
    k = int(math.ceil(rate * pop.size - 1e-9))
    if k <= 0:
        return pop
    from .population import Population

    fresh = Population(make(k, rng))
    fresh.t, fresh.T = pop.t, pop.T
    out = pop.concat(fresh)
    return out


def antibody_scores(scores, X, radius):
    """Divide each member score by the number of near-identical members."""
    d = flat(X)
    dist = np.sqrt(((d[:, None, :] - d[None, :, :]) ** 2).mean(axis=-1))
    crowd = (dist <= radius).sum(axis=1)
    return np.asarray(scores, dtype=float) / crowd


def forbid_clones(pop, ctx, sigma=0.5):
    """Perturb every exact duplicate after its first occurrence."""
    rows = np.ascontiguousarray(flat(pop.X))
    _, first = np.unique(rows, axis=0, return_index=True)
    dup = np.ones(pop.size, dtype=bool)
    dup[first] = False
    if dup.any():
        X = pop.X.copy()
        X[dup] += ctx.rng.normal(0.0, sigma, X[dup].shape)
        X = ctx.clamp(X)
        pop.set_positions(X, mask=dup)
    return pop


def decay_factor(rate, t):
    """Multiplicative step-size factor after ``t`` generations."""
    return 1.0 if rate is None else float(rate) ** t


@dataclass
class AuxiliaryToggles:
    elitism: float = 0.0
    repair: bool = False
    pfih: int = 0
    migration: int = 0
    cellular: bool = False
    injection: float = 0.0
    antibody: bool = False
    forbid_clones: bool = False
    decay: float | None = None
    extra: dict = field(default_factory=dict)

    def simplified(self):
        flags = {"Cellular": self.cellular, "Injection": self.injection > 0, "Antibody": self.antibody, "Decay": self.decay is not None}
        return sorted(k for k, v in flags.items() if v)


def apply_auxiliary(pops, toggles, ctxs, t, make=None, log=None):
    """End-of-generation maintenance over a list of evaluated populations.

    Runs repair, PFIH, clone removal and injection per population, then
    migration across them. Returns the (possibly resized) populations.
    """
    out = []
    for pop, ctx in zip(pops, ctxs):
        if toggles.repair:
            repair(pop, ctx)
        if toggles.pfih:
            pfih(pop, ctx, iterations=toggles.pfih)
        if toggles.forbid_clones:
            forbid_clones(pop, ctx)
            pop.evaluate(ctx.evaluate)
        if toggles.injection > 0 and make is not None:
            pop = inject(pop, toggles.injection, make, ctx.rng)
            pop.evaluate(ctx.evaluate)
        out.append(pop)
    if toggles.migration:
        migrate(out, t, toggles.migration, log)
    return out
