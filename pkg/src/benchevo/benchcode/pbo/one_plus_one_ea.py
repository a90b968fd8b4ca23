import numpy as np


class OnePlusOneEA:
    """Elitist single-parent EA with standard bit mutation."""

    def __init__(self, budget, dim, seed=None, mutation_rate=None):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)
        self.mutation_rate = mutation_rate if mutation_rate else 1.0 / dim

    def __call__(self, func):
        x = self.rng.integers(0, 2, self.dim)
        fx = func(x)
        while func.state.evaluations < self.budget:
            if fx >= func.optimum.y:
                break
            flips = self.rng.random(self.dim) < self.mutation_rate
            if not flips.any():
                flips[self.rng.integers(self.dim)] = True
            y = np.where(flips, 1 - x, x)
            fy = func(y)
            # accept ties so plateaus can drift
            if fy >= fx:
                x, fx = y, fy
        return fx, x
