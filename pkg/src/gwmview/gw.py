"""Gromov-Wasserstein solvers based on conditional gradient (Frank-Wolfe).

The squared quadratic objective for distance matrices ``Dx`` (n x n), ``Dy``
(m x m) and a plan ``T`` (n x m) is

    E(T) = sum_{i,j,k,l} (Dx[i,k] - Dy[j,l])^2 T[i,j] T[k,l].

It is evaluated without four-index loops through the standard decomposition

    E(T) = <c, T> - 2 <Dx @ T @ Dy.T, T>,
    c[i,j] = (Dx^2 @ mu)[i] + (Dy^2 @ nu)[j],

where ``mu`` and ``nu`` are the row/column marginals of ``T`` itself (this
keeps the identity valid on the semi-relaxed polytope, where column marginals
move between iterates). The full solver constrains both marginals and solves
its linearized step as an exact linear OT problem; the semi-relaxed solver
constrains rows only and its linearized step places each row's mass on the
cheapest column.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import csr_matrix

from .core import TransportPlan, as_matrix, as_weights, split_seeds
from .errors import LinearOtError, ShapeMismatchError

_UNIFORM_ATOL = 1e-12


@dataclass
class GwSolveConfig:
    """Conditional-gradient hyperparameters.

    ``init`` is ``None`` for the product coupling, or an explicit plan
    (array or :class:`TransportPlan`) for a warm start.
    """

    max_iters: int = 500
    tol: float = 1e-9
    init: object = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass
class GwResult:
    """Solver output: optimal plan, squared GW value and convergence info."""

    plan: TransportPlan
    cost: float
    iterations: int
    converged: bool
    objective_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "cost": self.cost,
            "iterations": self.iterations,
            "converged": self.converged,
            "plan": self.plan.mass.tolist(),
        }


def _check_shapes(Dx: np.ndarray, Dy: np.ndarray, T: np.ndarray) -> None:
    if Dx.shape[0] != Dx.shape[1] or Dy.shape[0] != Dy.shape[1]:
        raise ShapeMismatchError("distance matrices must be square")
    if T.shape != (Dx.shape[0], Dy.shape[0]):
        raise ShapeMismatchError(
            f"plan shape {T.shape} does not match spaces {Dx.shape[0]} x {Dy.shape[0]}"
        )


def _cost_and_grad(Dx, Dy, Dx2, Dy2, T):
    """Objective value and its (unconstrained) gradient at ``T``, sharing the
    expensive ``Dx @ T @ Dy.T`` product."""
    mu = T.sum(axis=1)
    nu = T.sum(axis=0)
    c = (Dx2 @ mu)[:, None] + (Dy2 @ nu)[None, :]
    K = Dx @ T @ Dy.T
    cost = float(np.sum(c * T) - 2.0 * np.sum(K * T))
    grad = 2.0 * (c - 2.0 * K)
    return cost, grad


def _pair_cost(Dx, Dy, Dx2, Dy2, A, B):
    """Symmetric bilinear form Q(A, B) underlying E (E(T) = Q(T, T))."""
    rA, cA = A.sum(axis=1), A.sum(axis=0)
    rB, cB = B.sum(axis=1), B.sum(axis=0)
    lin = float(rA @ Dx2 @ rB + cA @ Dy2 @ cB)
    cross = float(np.sum(A * (Dx @ B @ Dy.T)))
    return lin - 2.0 * cross


def gw_cost(Dx, Dy, T) -> float:
    """Quadratic GW objective at a plan, via the tensor decomposition.

    Equals the naive four-index sum for any nonnegative ``T``; the marginals
    entering the constant term are taken from ``T`` itself.
    """
    Dx = as_matrix(Dx)
    Dy = as_matrix(Dy)
    Tm = T.mass if isinstance(T, TransportPlan) else np.asarray(T, dtype=np.float64)
    _check_shapes(Dx, Dy, Tm)
    cost, _ = _cost_and_grad(Dx, Dy, Dx**2, Dy**2, Tm)
    return cost


def gw_gradient_wrt_plan(Dx, Dy, T) -> np.ndarray:
    """Gradient of :func:`gw_cost` with respect to the plan: 2(c - 2 Dx T Dy.T)."""
    Dx = as_matrix(Dx)
    Dy = as_matrix(Dy)
    Tm = T.mass if isinstance(T, TransportPlan) else np.asarray(T, dtype=np.float64)
    _check_shapes(Dx, Dy, Tm)
    _, grad = _cost_and_grad(Dx, Dy, Dx**2, Dy**2, Tm)
    return grad


def _linesearch_step(a: float, b: float) -> float:
    # exact minimizer of a*g^2 + b*g over [0, 1]
    if a > 0:
        return float(min(1.0, max(0.0, -b / (2.0 * a))))
    return 1.0 if b < 0 else 0.0


def _is_uniform(w: np.ndarray) -> bool:
    return bool(np.all(np.abs(w - 1.0 / w.size) <= _UNIFORM_ATOL))


def round_to_coupling(R, mu, nu) -> np.ndarray:
    """Project a nonnegative matrix onto the coupling polytope.

    Rows and columns are first scaled down to their targets, then the missing
    mass is re-added as a rank-one nonnegative correction; the result matches
    both marginals to machine precision.
    """
    R = np.array(R, dtype=np.float64)
    r = R.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        R *= np.minimum(np.where(r > 0, mu / r, 1.0), 1.0)[:, None]
    c = R.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        R *= np.minimum(np.where(c > 0, nu / c, 1.0), 1.0)[None, :]
    err_r = mu - R.sum(axis=1)
    err_c = nu - R.sum(axis=0)
    total = err_r.sum()
    if total > 0:
        R += np.outer(err_r, err_c) / total
    return R


def random_coupling(mu, nu, rng) -> np.ndarray:
    """Random feasible coupling: a positive matrix rescaled to the marginals
    (alternating row/column scaling, then an exact polytope projection)."""
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    R = rng.uniform(0.5, 1.5, size=(mu.size, nu.size))
    for _ in range(500):
        R *= (mu / R.sum(axis=1))[:, None]
        R *= (nu / R.sum(axis=0))[None, :]
        if float(np.max(np.abs(R.sum(axis=1) - mu))) < 1e-14:
            break
    return round_to_coupling(R, mu, nu)


def random_row_coupling(mu, m: int, rng) -> np.ndarray:
    """Random plan with exact row marginals and free columns."""
    mu = np.asarray(mu, dtype=np.float64)
    R = rng.uniform(0.5, 1.5, size=(mu.size, m))
    R *= (mu / R.sum(axis=1))[:, None]
    return R


def solve_linear_ot(cost, mu, nu) -> np.ndarray:
    """Exact solution of min_{X in Pi(mu, nu)} <cost, X>.

    Uniform same-size marginals are solved by min-cost assignment (the optimum
    of this LP sits at a permutation vertex); everything else goes through an
    exact LP solve. Marginals of the output are exact to ~1e-12.
    """
    cost = np.asarray(cost, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    n, m = cost.shape
    if mu.shape != (n,) or nu.shape != (m,):
        raise ShapeMismatchError("marginal sizes do not match the cost matrix")
    if n == m and _is_uniform(mu) and _is_uniform(nu):
        rows, cols = linear_sum_assignment(cost)
        X = np.zeros((n, m))
        X[rows, cols] = 1.0 / n
        return X
    rows = []
    cols = []
    data = []
    for i in range(n):
        rows.extend([i] * m)
        cols.extend(range(i * m, (i + 1) * m))
        data.extend([1.0] * m)
    for j in range(m):
        rows.extend([n + j] * n)
        cols.extend(range(j, n * m, m))
        data.extend([1.0] * n)
    A = csr_matrix((data, (rows, cols)), shape=(n + m, n * m))
    b = np.concatenate([mu, nu])
    res = linprog(cost.ravel(), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if not res.success:
        raise LinearOtError(f"linear OT subproblem failed: {res.message}")
    X = np.clip(res.x.reshape(n, m), 0.0, None)
    err = max(
        float(np.max(np.abs(X.sum(axis=1) - mu))),
        float(np.max(np.abs(X.sum(axis=0) - nu))),
    )
    if err > 1e-12:
        X = round_to_coupling(X, mu, nu)
    return X


def _init_plan(init, mu, nu_or_m, semirelaxed: bool) -> np.ndarray:
    if init is None:
        if semirelaxed:
            m = nu_or_m
            return np.outer(mu, np.full(m, 1.0 / m))
        return np.outer(mu, nu_or_m)
    if isinstance(init, TransportPlan):
        return np.array(init.mass, dtype=np.float64)
    return np.array(init, dtype=np.float64)


def _conditional_gradient(Dx, Dy, T, direction, max_iters, tol):
    Dx2 = Dx**2
    Dy2 = Dy**2
    cost, grad = _cost_and_grad(Dx, Dy, Dx2, Dy2, T)
    trace = [cost]
    converged = False
    iterations = 0
    for _ in range(max_iters):
        X = direction(grad)
        delta = X - T
        b = float(np.sum(grad * delta))
        a = _pair_cost(Dx, Dy, Dx2, Dy2, delta, delta)
        gamma = _linesearch_step(a, b)
        if gamma <= 0.0:
            converged = True
            break
        iterations += 1
        T_new = T + gamma * delta
        new_cost, new_grad = _cost_and_grad(Dx, Dy, Dx2, Dy2, T_new)
        if new_cost > cost:
            # float-precision floor: the exact line search cannot increase
            # the objective, so stop and keep the previous iterate
            converged = True
            break
        rel_drop = (cost - new_cost) / max(abs(cost), 1e-16)
        T, cost, grad = T_new, new_cost, new_grad
        trace.append(cost)
        if rel_drop <= tol:
            converged = True
            break
    return T, cost, iterations, converged, trace


def solve_gw(Dx, mu, Dy, nu, cfg: GwSolveConfig | None = None) -> GwResult:
    """Squared Gromov-Wasserstein distance between two metric-measure spaces.

    Conditional gradient over the coupling polytope: each iteration solves the
    linearized problem exactly as a linear OT, then takes the exact quadratic
    line-search step along the segment. The returned plan satisfies both
    marginal contracts and the objective trace is non-increasing.

    Parameters
    ----------
    Dx, Dy : DistanceMatrix or array
        Intra-space distance matrices.
    mu, nu : DiscreteMeasure, array or None
        Weights on each space; None means uniform.
    cfg : GwSolveConfig, optional
    """
    cfg = cfg or GwSolveConfig()
    Dx = as_matrix(Dx)
    Dy = as_matrix(Dy)
    mu = as_weights(mu, Dx.shape[0])
    nu = as_weights(nu, Dy.shape[0])
    if mu.shape != (Dx.shape[0],) or nu.shape != (Dy.shape[0],):
        raise ShapeMismatchError("measure sizes do not match their distance matrices")
    T0 = _init_plan(cfg.init, mu, nu, semirelaxed=False)
    _check_shapes(Dx, Dy, T0)
    T, cost, iters, converged, trace = _conditional_gradient(
        Dx, Dy, T0, lambda G: solve_linear_ot(G, mu, nu), cfg.max_iters, cfg.tol
    )
    from .core import DiscreteMeasure  # local import to avoid cycle at module load

    plan = TransportPlan.coupling(T, DiscreteMeasure(mu), DiscreteMeasure(nu))
    return GwResult(plan, cost, iters, converged, trace)


def solve_srgw(Dx, mu, Dy, cfg: GwSolveConfig | None = None) -> GwResult:
    """Semi-relaxed GW: the column marginal is free.

    Same conditional-gradient scheme as :func:`solve_gw`, but the linearized
    direction puts each row's mass on its cheapest column (ties to the lowest
    index), so only the row-marginal contract holds for the output.
    """
    cfg = cfg or GwSolveConfig()
    Dx = as_matrix(Dx)
    Dy = as_matrix(Dy)
    mu = as_weights(mu, Dx.shape[0])
    if mu.shape != (Dx.shape[0],):
        raise ShapeMismatchError("measure size does not match the distance matrix")
    m = Dy.shape[0]
    T0 = _init_plan(cfg.init, mu, m, semirelaxed=True)
    _check_shapes(Dx, Dy, T0)

    def direction(G):
        X = np.zeros_like(G)
        X[np.arange(G.shape[0]), np.argmin(G, axis=1)] = mu
        return X

    T, cost, iters, converged, trace = _conditional_gradient(
        Dx, Dy, T0, direction, cfg.max_iters, cfg.tol
    )
    from .core import DiscreteMeasure

    plan = TransportPlan.semi_relaxed(T, DiscreteMeasure(mu))
    return GwResult(plan, cost, iters, converged, trace)


def _best_of(results) -> GwResult:
    best = results[0]
    for r in results[1:]:
        if r.cost < best.cost:
            best = r
    return best


def _run_restarts(run, inits, threads: int):
    if threads > 1 and len(inits) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, inits))
    return [run(T0) for T0 in inits]


def solve_gw_best(Dx, mu, Dy, nu, cfg=None, restarts: int = 3, seed: int = 0, threads: int = 1) -> GwResult:
    """Multi-restart GW driver: the configured init plus seeded random
    feasible couplings; lowest cost wins (ties keep the earliest restart)."""
    cfg = cfg or GwSolveConfig()
    Dx_ = as_matrix(Dx)
    Dy_ = as_matrix(Dy)
    mu_ = as_weights(mu, Dx_.shape[0])
    nu_ = as_weights(nu, Dy_.shape[0])
    inits = [cfg.init]
    for rng in split_seeds(seed, max(restarts - 1, 0)):
        inits.append(random_coupling(mu_, nu_, rng))
    results = _run_restarts(
        lambda T0: solve_gw(Dx, mu, Dy, nu, replace(cfg, init=T0)), inits, threads
    )
    return _best_of(results)


def solve_srgw_best(Dx, mu, Dy, cfg=None, restarts: int = 3, seed: int = 0, threads: int = 1) -> GwResult:
    """Multi-restart semi-relaxed GW driver."""
    cfg = cfg or GwSolveConfig()
    Dx_ = as_matrix(Dx)
    Dy_ = as_matrix(Dy)
    mu_ = as_weights(mu, Dx_.shape[0])
    inits = [cfg.init]
    for rng in split_seeds(seed, max(restarts - 1, 0)):
        inits.append(random_row_coupling(mu_, Dy_.shape[0], rng))
    results = _run_restarts(
        lambda T0: solve_srgw(Dx, mu, Dy, replace(cfg, init=T0)), inits, threads
    )
    return _best_of(results)
