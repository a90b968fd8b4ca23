import numpy as np


class UMDA:
    """Univariate marginal distribution algorithm with clamped frequencies."""

    def __init__(self, budget, dim, seed=None, pop_size=None):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)
        self.pop_size = pop_size if pop_size else max(20, dim // 2)

    def __call__(self, func):
        mu = max(2, self.pop_size // 2)
        margin = 1.0 / max(2.0, self.dim)
        p = np.full(self.dim, 0.5)
        f_opt, x_opt = -np.inf, None
        while func.state.evaluations < self.budget:
            pop, fs = [], []
            for _ in range(self.pop_size):
                if func.state.evaluations >= self.budget:
                    break
                x = (self.rng.random(self.dim) < p).astype(int)
                f = func(x)
                pop.append(x)
                fs.append(f)
                if f > f_opt:
                    f_opt, x_opt = f, x
            if not pop or f_opt >= func.optimum.y:
                break
            order = np.argsort(fs)[::-1][:mu]
            p = np.clip(np.mean([pop[i] for i in order], axis=0), margin, 1.0 - margin)
        return f_opt, x_opt
