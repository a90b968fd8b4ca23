import numpy as np


class RandomSearch:
    def __init__(self, budget, dim, seed=None):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)

    def __call__(self, func):
        f_opt = np.inf
        x_opt = None
        for i in range(self.budget):
            x = self.rng.uniform(func.bounds.lb, func.bounds.ub)
            f = func(x)
            if f < f_opt:
                f_opt = f
                x_opt = x
            if f_opt <= func.optimum.y:
                break
        return f_opt, x_opt
