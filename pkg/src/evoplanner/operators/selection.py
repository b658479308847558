"""Rank scoring and parent selection policies."""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import ConfigError, InvalidSpecError

LINEAR = "Linear"
LOGARITHMIC = "Logarithmic"
EXPONENTIAL = "Exponential"
UNIFORM = "Uniform"
SCHEMES = (LINEAR, LOGARITHMIC, EXPONENTIAL, UNIFORM)

TOURNAMENT = "Tournament"
TRUNCATION = "Truncation"
ROULETTE = "RouletteWheel"
SUS = "StochasticUniversalSampling"
POLICIES = (TOURNAMENT, TRUNCATION, ROULETTE, SUS)


def _permutation(order):
    return np.asarray(getattr(order, "permutation", order), dtype=int)


def rank_scores(order, scheme=LINEAR, ratio=0.8):
    """Positive, non-increasing score per rank position (best first).

    Linear decreases by a constant step, Logarithmic follows ``log(1 + N - r)``
    and Exponential keeps a constant ratio between neighbours.
    """
    N = _permutation(order).size
    r = np.arange(N, dtype=float)
    if scheme == LINEAR:
        return (N - r) / N
    if scheme == LOGARITHMIC:
        return np.log1p(N - r) / math.log1p(N)
    if scheme == EXPONENTIAL:
        return ratio**r
    if scheme == UNIFORM:
        return np.ones(N)
    raise ConfigError(f"unknown rank scheme {scheme!r}")


def member_scores(order, scores):
    """Scatter per-position scores back to member indices."""
    perm = _permutation(order)
    out = np.empty(perm.size)
    out[perm] = scores
    return out


def _roulette(weights, rng, k):
    p = weights / weights.sum()
    return rng.choice(weights.size, size=k, p=p)


def _sus(weights, rng, k):
    cum = np.cumsum(weights)
    step = cum[-1] / k
    pointers = rng.uniform(0.0, step) + step * np.arange(k)
    idx = np.searchsorted(cum, pointers, side="right")
    return np.minimum(idx, weights.size - 1)


def select(pop, order, policy, params=None, rng=None, k=None, scores=None):
    """Return ``k`` member indices chosen by ``policy``.

    ``params`` may carry ``candidates`` (Tournament), ``cutoff`` (Truncation)
    and ``scheme`` (wheel policies). ``scores`` overrides the per-position
    rank scores, e.g. after antibody damping.
    """
    perm = _permutation(order)
    N = perm.size
    if N == 0:
        raise InvalidSpecError("cannot select from an empty population")
    params = dict(params or {})
    k = N if k is None else int(k)
    if policy == TOURNAMENT:
        c = int(min(max(params.get("candidates", 2), 1), N))
        pos = np.argsort(rng.random((k, N)), axis=1)[:, :c]  # distinct rank positions
        return perm[pos.min(axis=1)]
    if policy == TRUNCATION:
        keep = int(math.floor(params.get("cutoff", 0.5) * N + 1e-9))
        if keep < 1:
            raise InvalidSpecError("truncation cutoff keeps no members")
        return perm[rng.integers(0, keep, size=k)]
    if scores is None:
        scores = rank_scores(perm, params.get("scheme", LINEAR))
    scores = np.asarray(scores, dtype=float)
    if policy == ROULETTE:
        return perm[_roulette(scores, rng, k)]
    if policy == SUS:
        return perm[_sus(scores, rng, k)]
    raise ConfigError(f"unknown selection policy {policy!r}")
