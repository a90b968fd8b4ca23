import numpy as np


class CMAES:
    """Covariance matrix adaptation ES with rank-one and rank-mu updates."""

    def __init__(self, budget, dim, seed=None):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)

    def __call__(self, func):
        n = self.dim
        lb = np.asarray(func.bounds.lb, dtype=float)
        ub = np.asarray(func.bounds.ub, dtype=float)
        lam = 4 + int(3 * np.log(n))
        mu = lam // 2
        weights = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        weights = weights / weights.sum()
        mueff = 1.0 / np.sum(weights**2)

        cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        cs = (mueff + 2) / (n + mueff + 5)
        c1 = 2 / ((n + 1.3) ** 2 + mueff)
        cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        damps = 1 + 2 * max(0.0, np.sqrt((mueff - 1) / (n + 1)) - 1) + cs
        chi_n = np.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

        xmean = self.rng.uniform(lb, ub)
        sigma = 0.3 * float(np.max(ub - lb))
        pc = np.zeros(n)
        ps = np.zeros(n)
        B = np.eye(n)
        D = np.ones(n)
        C = np.eye(n)
        inv_sqrt_c = np.eye(n)
        lazy_gap = max(1, int(1 / (c1 + cmu) / n / 10))

        f_opt, x_opt = np.inf, None
        gen = 0
        while func.state.evaluations < self.budget:
            xs = np.empty((lam, n))
            fs = np.full(lam, np.inf)
            for k in range(lam):
                if func.state.evaluations >= self.budget:
                    break
                z = self.rng.standard_normal(n)
                xs[k] = np.clip(xmean + sigma * (B @ (D * z)), lb, ub)
                fs[k] = func(xs[k])
                if fs[k] < f_opt:
                    f_opt, x_opt = fs[k], xs[k].copy()
            gen += 1
            if f_opt <= func.optimum.y or func.state.evaluations >= self.budget:
                break

            order = np.argsort(fs)
            xold = xmean
            xmean = weights @ xs[order[:mu]]
            y = (xmean - xold) / sigma
            ps = (1 - cs) * ps + np.sqrt(cs * (2 - cs) * mueff) * (inv_sqrt_c @ y)
            hsig = float(
                np.linalg.norm(ps) / np.sqrt(1 - (1 - cs) ** (2 * gen)) / chi_n
                < 1.4 + 2 / (n + 1)
            )
            pc = (1 - cc) * pc + hsig * np.sqrt(cc * (2 - cc) * mueff) * y
            steps = (xs[order[:mu]] - xold) / sigma
            C = (
                (1 - c1 - cmu) * C
                + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * C)
                + cmu * steps.T @ (weights[:, None] * steps)
            )
            sigma *= np.exp((cs / damps) * (np.linalg.norm(ps) / chi_n - 1))

            if gen % lazy_gap == 0:
                C = np.triu(C) + np.triu(C, 1).T
                eigvals, B = np.linalg.eigh(C)
                D = np.sqrt(np.maximum(eigvals, 1e-20))
                inv_sqrt_c = B @ np.diag(1 / D) @ B.T
        return f_opt, x_opt
