import numpy as np


class DifferentialEvolution:
    """Classic rand/1/bin differential evolution."""

    def __init__(self, budget, dim, seed=None, pop_size=None, f=0.5, cr=0.9):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)
        self.pop_size = pop_size if pop_size else max(4, 10 * dim)
        self.f = f
        self.cr = cr

    def __call__(self, func):
        n = self.dim
        lb = np.asarray(func.bounds.lb, dtype=float)
        ub = np.asarray(func.bounds.ub, dtype=float)
        size = self.pop_size
        pop = self.rng.uniform(lb, ub, size=(size, n))
        fit = np.full(size, np.inf)
        f_opt, x_opt = np.inf, None

        for i in range(size):
            if func.state.evaluations >= self.budget:
                break
            fit[i] = func(pop[i])
            if fit[i] < f_opt:
                f_opt, x_opt = fit[i], pop[i].copy()

        while func.state.evaluations < self.budget:
            if f_opt <= func.optimum.y:
                break
            for i in range(size):
                if func.state.evaluations >= self.budget:
                    break
                others = np.delete(np.arange(size), i)
                r0, r1, r2 = self.rng.choice(others, size=3, replace=False)
                mutant = pop[r0] + self.f * (pop[r1] - pop[r2])
                cross = self.rng.random(n) < self.cr
                cross[self.rng.integers(n)] = True
                trial = np.clip(np.where(cross, mutant, pop[i]), lb, ub)
                ft = func(trial)
                if ft <= fit[i]:
                    pop[i], fit[i] = trial, ft
                if ft < f_opt:
                    f_opt, x_opt = ft, trial.copy()
        return f_opt, x_opt
