"""Population state and the feasibility-first ordering shared by all operators."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..evaluation import EvaluationReport, is_feasible, violation_total
from ..exceptions import NotEvaluatedError


def order_keys(F, cons):
    """Sort keys: feasible first, then F (feasible) or total violation."""
    F = np.asarray(F, dtype=float)
    viol = violation_total(cons)
    infeasible = viol > 0
    secondary = np.where(infeasible, viol, F)
    return infeasible, secondary, F


def rank_order(F, cons):
    """Indices best-first under the feasibility-first ordering."""
    infeasible, secondary, F = order_keys(F, cons)
    return np.lexsort((F, secondary, infeasible))


def better(F_a, cons_a, F_b, cons_b):
    """Elementwise strict 'a is better than b'."""
    ia, sa, fa = order_keys(F_a, cons_a)
    ib, sb, fb = order_keys(F_b, cons_b)
    return (ia < ib) | ((ia == ib) & ((sa < sb) | ((sa == sb) & (fa < fb))))


def not_worse(F_a, cons_a, F_b, cons_b):
    return ~better(F_b, cons_b, F_a, cons_a)


@dataclass
class Individual:
    """Read-only view of one member, mostly for inspection and tests."""

    path: np.ndarray
    velocity: np.ndarray
    report: EvaluationReport | None
    p_best: np.ndarray
    cuu: int


@dataclass
class Population:
    """Array-backed population of control-point paths.

    ``X`` holds positions ``(N, n, 3)`` and ``V`` the swarm velocities of the
    same shape. ``F`` is NaN for members whose path changed since the last
    evaluation. ``gbest_*`` is the best path ever seen and only improves.
    """

    X: np.ndarray
    V: np.ndarray = None
    F: np.ndarray = None
    cons: np.ndarray = None
    objs: np.ndarray = None
    pbest_X: np.ndarray = None
    pbest_F: np.ndarray = None
    pbest_cons: np.ndarray = None
    cuu: np.ndarray = None
    gbest_X: np.ndarray = None
    gbest_F: float = np.inf
    gbest_cons: np.ndarray = field(default_factory=lambda: np.full(5, np.inf))
    gbest_objs: np.ndarray = field(default_factory=lambda: np.full(5, np.nan))
    t: int = 0
    T: int = 1

    def __post_init__(self):
        self.X = np.array(self.X, dtype=float)
        N = self.X.shape[0]
        if self.V is None:
            self.V = np.zeros_like(self.X)
        if self.F is None:
            self.F = np.full(N, np.nan)
        if self.cons is None:
            self.cons = np.full((N, 5), np.nan)
        if self.objs is None:
            self.objs = np.full((N, 5), np.nan)
        if self.pbest_X is None:
            self.pbest_X = self.X.copy()
            self.pbest_F = np.full(N, np.inf)
            self.pbest_cons = np.full((N, 5), np.inf)
        if self.cuu is None:
            self.cuu = np.zeros(N, dtype=int)
        if self.gbest_X is None:
            self.gbest_X = self.X[0].copy() if N else None

    # -- bookkeeping -----------------------------------------------------

    @property
    def size(self):
        return self.X.shape[0]

    def __len__(self):
        return self.size

    @property
    def dim(self):
        return int(np.prod(self.X.shape[1:]))

    @property
    def evaluated(self):
        return ~np.isnan(self.F)

    def require_evaluated(self):
        if not np.all(self.evaluated):
            raise NotEvaluatedError("population has unevaluated members")

    @property
    def violation(self):
        return violation_total(self.cons)

    @property
    def feasible(self):
        return is_feasible(self.cons)

    def copy(self):
        return replace(
            self,
            X=self.X.copy(),
            V=self.V.copy(),
            F=self.F.copy(),
            cons=self.cons.copy(),
            objs=self.objs.copy(),
            pbest_X=self.pbest_X.copy(),
            pbest_F=self.pbest_F.copy(),
            pbest_cons=self.pbest_cons.copy(),
            cuu=self.cuu.copy(),
            gbest_X=None if self.gbest_X is None else self.gbest_X.copy(),
            gbest_cons=self.gbest_cons.copy(),
            gbest_objs=self.gbest_objs.copy(),
        )

    def take(self, idx):
        """New population made of the members at ``idx`` (copies)."""
        idx = np.asarray(idx, dtype=int)
        return replace(
            self,
            X=self.X[idx].copy(),
            V=self.V[idx].copy(),
            F=self.F[idx].copy(),
            cons=self.cons[idx].copy(),
            objs=self.objs[idx].copy(),
            pbest_X=self.pbest_X[idx].copy(),
            pbest_F=self.pbest_F[idx].copy(),
            pbest_cons=self.pbest_cons[idx].copy(),
            cuu=self.cuu[idx].copy(),
            gbest_X=None if self.gbest_X is None else self.gbest_X.copy(),
            gbest_cons=self.gbest_cons.copy(),
            gbest_objs=self.gbest_objs.copy(),
        )

    def concat(self, other):
        out = self.copy()
        for name in ("X", "V", "F", "cons", "objs", "pbest_X", "pbest_F", "pbest_cons", "cuu"):
            setattr(out, name, np.concatenate([getattr(self, name), getattr(other, name)]))
        return out

    def set_positions(self, X, mask=None):
        """Overwrite positions and mark the changed members unevaluated."""
        X = np.asarray(X, dtype=float)
        if mask is None:
            changed = np.any((X != self.X).reshape(self.size, -1), axis=1)
        else:
            changed = np.asarray(mask, dtype=bool)
        self.X = X.copy()
        self.F[changed] = np.nan
        self.cons[changed] = np.nan
        self.objs[changed] = np.nan
        return changed

    def set_reports(self, idx, objs, F, cons):
        self.objs[idx] = objs
        self.F[idx] = F
        self.cons[idx] = cons

    def evaluate(self, evaluate):
        """Score every member whose report is stale; returns the count scored."""
        todo = np.flatnonzero(~self.evaluated)
        if todo.size:
            objs, F, cons = evaluate(self.X[todo])
            self.set_reports(todo, objs, F, cons)
        return int(todo.size)

    def order(self):
        self.require_evaluated()
        return rank_order(self.F, self.cons)

    def best_index(self):
        return int(self.order()[0])

    def update_memory(self):
        """Refresh personal and global bests from the current reports."""
        self.require_evaluated()
        improved = better(self.F, self.cons, self.pbest_F, self.pbest_cons)
        self.pbest_X[improved] = self.X[improved]
        self.pbest_F[improved] = self.F[improved]
        self.pbest_cons[improved] = self.cons[improved]
        b = self.best_index()
        self.offer_gbest(self.X[b], self.F[b], self.cons[b], self.objs[b])

    def offer_gbest(self, X, F, cons, objs=None):
        """Replace the global best if the candidate is strictly better."""
        if self.gbest_X is None or bool(better(F, cons, self.gbest_F, self.gbest_cons)):
            self.gbest_X = np.array(X, dtype=float).copy()
            self.gbest_F = float(F)
            self.gbest_cons = np.array(cons, dtype=float).copy()
            if objs is not None:
                self.gbest_objs = np.array(objs, dtype=float).copy()
            return True
        return False

    def member(self, i):
        report = None
        if self.evaluated[i]:
            report = EvaluationReport.from_arrays(self.objs[i], self.F[i], self.cons[i])
        return Individual(self.X[i].copy(), self.V[i].ravel().copy(), report, self.pbest_X[i].copy(), int(self.cuu[i]))

    @property
    def gbest_report(self):
        return EvaluationReport.from_arrays(self.gbest_objs, self.gbest_F, self.gbest_cons)


def flat(X):
    """``(N, n, 3)`` -> ``(N, 3n)`` view used by gene-wise operators."""
    return X.reshape(X.shape[0], -1)
