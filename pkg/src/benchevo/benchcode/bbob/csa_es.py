import numpy as np


class CSAES:
    """Isotropic evolution strategy with cumulative step-size adaptation."""

    def __init__(self, budget, dim, seed=None):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)

    def __call__(self, func):
        n = self.dim
        lb = np.asarray(func.bounds.lb, dtype=float)
        ub = np.asarray(func.bounds.ub, dtype=float)
        lam = 4 + int(3 * np.log(n))
        mu = max(1, lam // 2)
        weights = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        weights = weights / weights.sum()
        mueff = 1.0 / np.sum(weights**2)
        cs = (mueff + 2) / (n + mueff + 3)
        damps = 1 + 2 * max(0.0, np.sqrt((mueff - 1) / (n + 1)) - 1) + cs
        chi_n = np.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

        xmean = self.rng.uniform(lb, ub)
        sigma = 0.3 * float(np.max(ub - lb))
        ps = np.zeros(n)
        f_opt, x_opt = np.inf, None

        while func.state.evaluations < self.budget:
            zs = np.empty((lam, n))
            xs = np.empty((lam, n))
            fs = np.full(lam, np.inf)
            for k in range(lam):
                if func.state.evaluations >= self.budget:
                    break
                zs[k] = self.rng.standard_normal(n)
                xs[k] = np.clip(xmean + sigma * zs[k], lb, ub)
                fs[k] = func(xs[k])
                if fs[k] < f_opt:
                    f_opt, x_opt = fs[k], xs[k].copy()
            if f_opt <= func.optimum.y or func.state.evaluations >= self.budget:
                break
            order = np.argsort(fs)[:mu]
            xmean = weights @ xs[order]
            z_mean = weights @ zs[order]
            ps = (1 - cs) * ps + np.sqrt(cs * (2 - cs) * mueff) * z_mean
            sigma *= np.exp((cs / damps) * (np.linalg.norm(ps) / chi_n - 1))
        return f_opt, x_opt
