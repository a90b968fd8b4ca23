import numpy as np


class CholeskyCMAES:
    """Elitist (1+1) CMA-ES maintaining the Cholesky factor directly."""

    def __init__(self, budget, dim, seed=None):
        self.budget = budget
        self.dim = dim
        self.rng = np.random.default_rng(seed)

    def __call__(self, func):
        n = self.dim
        lb = np.asarray(func.bounds.lb, dtype=float)
        ub = np.asarray(func.bounds.ub, dtype=float)

        p_target = 2.0 / 11.0
        c_p = 1.0 / 12.0
        damping = 1.0 + n / 2.0
        c_cov = 2.0 / (n**2 + 6.0)
        p_thresh = 0.44

        x = self.rng.uniform(lb, ub)
        fx = func(x)
        sigma = 0.3 * float(np.max(ub - lb))
        A = np.eye(n)
        p_succ = p_target

        while func.state.evaluations < self.budget:
            if fx <= func.optimum.y:
                break
            z = self.rng.standard_normal(n)
            y = np.clip(x + sigma * (A @ z), lb, ub)
            fy = func(y)
            success = 1.0 if fy <= fx else 0.0
            p_succ = (1 - c_p) * p_succ + c_p * success
            sigma *= np.exp((p_succ - p_target) / (damping * (1 - p_target)))
            sigma = float(np.clip(sigma, 1e-12, np.max(ub - lb)))
            if fy <= fx:
                x, fx = y, fy
                if p_succ < p_thresh:
                    z_norm2 = float(z @ z)
                    if z_norm2 > 0:
                        ca = np.sqrt(1 - c_cov)
                        scale = (ca / z_norm2) * (
                            np.sqrt(1 + (1 - ca**2) * z_norm2 / ca**2) - 1
                        )
                        A = ca * A + scale * np.outer(A @ z, z)
        return fx, x
