"""Shared state handed to step operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class StepContext:
    """Random stream, bounds and evaluation hook for one generation.

    ``evaluate`` maps ``(B, n, 3)`` control points to ``(objs, F, cons)``.
    ``scale`` is the decay multiplier applied to operator step sizes and
    ``anchors`` the rotated start and target points.
    """

    rng: np.random.Generator
    bounds: object = None
    evaluate: Callable | None = None
    scale: float = 1.0
    anchors: tuple | None = None
    log: list = field(default_factory=list)

    def clamp(self, X):
        return X if self.bounds is None else self.bounds.clamp(np.array(X, dtype=float))

    @property
    def span(self):
        """Per-coordinate width of the search box, shape ``(n, 3)``."""
        return self.bounds.upper - self.bounds.lower
