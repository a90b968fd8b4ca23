import numpy as np


class ParticleSwarm:
    """Global-best PSO with constriction-style coefficients and velocity clamp."""

    def __init__(self, budget, dim, seed=None, swarm_size=None):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)
        self.swarm_size = swarm_size if swarm_size else max(10, 2 * dim)

    def __call__(self, func):
        n = self.dim
        lb = np.asarray(func.bounds.lb, dtype=float)
        ub = np.asarray(func.bounds.ub, dtype=float)
        size = self.swarm_size
        w, c1, c2 = 0.7298, 1.49618, 1.49618
        v_max = 0.2 * (ub - lb)

        pos = self.rng.uniform(lb, ub, size=(size, n))
        vel = self.rng.uniform(-v_max, v_max, size=(size, n))
        pbest = pos.copy()
        pbest_f = np.full(size, np.inf)
        f_opt, x_opt = np.inf, None

        for i in range(size):
            if func.state.evaluations >= self.budget:
                break
            pbest_f[i] = func(pos[i])
            if pbest_f[i] < f_opt:
                f_opt, x_opt = pbest_f[i], pos[i].copy()

        while func.state.evaluations < self.budget:
            if f_opt <= func.optimum.y or x_opt is None:
                break
            for i in range(size):
                if func.state.evaluations >= self.budget:
                    break
                r1 = self.rng.random(n)
                r2 = self.rng.random(n)
                vel[i] = (
                    w * vel[i]
                    + c1 * r1 * (pbest[i] - pos[i])
                    + c2 * r2 * (x_opt - pos[i])
                )
                vel[i] = np.clip(vel[i], -v_max, v_max)
                pos[i] = np.clip(pos[i] + vel[i], lb, ub)
                f = func(pos[i])
                if f < pbest_f[i]:
                    pbest[i], pbest_f[i] = pos[i].copy(), f
                if f < f_opt:
                    f_opt, x_opt = f, pos[i].copy()
        return f_opt, x_opt
