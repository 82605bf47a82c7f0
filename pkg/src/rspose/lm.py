"""Small dense Levenberg-Marquardt with finite-difference Jacobians.

Supports an optional retraction `plus(state, delta)` so that states living
on a manifold (unit quaternions) can be optimized through a local
3-vector increment. Jacobians use central differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LMResult:
    state: object
    cost: float
    converged: bool
    iterations: int


def _default_plus(x, delta):
    return np.asarray(x, dtype=float) + delta


def levenberg_marquardt(residual_fn, x0, n_params: int, *,
                        plus=None,
                        fd_step: float = 1e-7,
                        max_iterations: int = 100,
                        step_tol: float = 1e-10,
                        initial_damping: float = 1e-3) -> LMResult:
    """Minimize 0.5 * ||residual_fn(x)||^2 over an n_params increment.

    `plus` maps (state, increment) -> state; plain vector states use
    addition. Only cost-decreasing steps are accepted, so the cost trace
    is monotone.
    """
    if plus is None:
        plus = _default_plus
    x = x0
    r = np.atleast_1d(np.asarray(residual_fn(x), dtype=float))
    cost = float(r @ r)
    mu = initial_damping
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        jac = np.empty((r.size, n_params))
        for k in range(n_params):
            e = np.zeros(n_params)
            e[k] = fd_step
            rp = np.atleast_1d(residual_fn(plus(x, e)))
            rm = np.atleast_1d(residual_fn(plus(x, -e)))
            jac[:, k] = (rp - rm) / (2.0 * fd_step)
        # huge residuals far from any solution can overflow the normal
        # equations; the non-finite products are rejected below anyway
        with np.errstate(over="ignore", invalid="ignore"):
            jtj = jac.T @ jac
            g = jac.T @ r
        if not (np.all(np.isfinite(jtj)) and np.all(np.isfinite(g))):
            break
        if np.linalg.norm(g, np.inf) < 1e-15:
            converged = True
            break
        accepted = False
        while mu < 1e14:
            try:
                delta = np.linalg.solve(
                    jtj + mu * np.diag(np.maximum(np.diag(jtj), 1e-12)), -g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            x_new = plus(x, delta)
            r_new = np.atleast_1d(np.asarray(residual_fn(x_new), dtype=float))
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                x, r, cost = x_new, r_new, cost_new
                mu = max(mu / 3.0, 1e-12)
                accepted = True
                if np.linalg.norm(delta) < step_tol:
                    converged = True
                break
            mu *= 10.0
        if not accepted:
            # no decreasing step at any damping: treat as a local minimum
            converged = True
            break
        if converged or cost < 1e-28:
            converged = True
            break
    return LMResult(state=x, cost=cost, converged=converged, iterations=it)
