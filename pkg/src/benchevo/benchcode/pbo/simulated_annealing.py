import numpy as np


class SimulatedAnnealing:
    """One-bit-flip annealing with geometric cooling over the whole budget."""

    def __init__(self, budget, dim, seed=None, t_start=1.0, t_end=1e-3):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)
        self.t_start = t_start
        self.t_end = t_end

    def __call__(self, func):
        x = self.rng.integers(0, 2, self.dim)
        fx = func(x)
        f_opt, x_opt = fx, x.copy()
        cooling = (self.t_end / self.t_start) ** (1.0 / max(1, self.budget - 1))
        temp = self.t_start
        while func.state.evaluations < self.budget:
            if f_opt >= func.optimum.y:
                break
            y = x.copy()
            i = self.rng.integers(self.dim)
            y[i] = 1 - y[i]
            fy = func(y)
            if fy >= fx or self.rng.random() < np.exp((fy - fx) / temp):
                x, fx = y, fy
            if fy > f_opt:
                f_opt, x_opt = fy, y.copy()
            temp = max(temp * cooling, self.t_end)
        return f_opt, x_opt
