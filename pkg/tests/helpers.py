"""Small builders shared by the operator and engine tests."""

import numpy as np

from evoplanner.evaluation import Evaluator
from evoplanner.operators import Population, StepContext
from evoplanner.pathmodel import endpoints_rotated, initialize_population


def make_evaluator(scenario, n=6):
    return Evaluator(scenario, n)


def make_population(ev, size, rng, t=0, T=10):
    X = initialize_population(ev.scenario, ev.frame, ev.bounds, size, rng)
    pop = Population(X)
    pop.t, pop.T = t, T
    pop.evaluate(ev)
    pop.update_memory()
    return pop


def make_context(ev, rng):
    return StepContext(rng=rng, bounds=ev.bounds, evaluate=ev, anchors=endpoints_rotated(ev.scenario, ev.frame))


def synthetic_population(F, cons):
    F = np.asarray(F, dtype=float)
    X = np.arange(F.size * 6, dtype=float).reshape(F.size, 2, 3)
    pop = Population(X)
    pop.set_reports(np.arange(F.size), np.zeros((F.size, 5)), F, np.asarray(cons, dtype=float))
    return pop
