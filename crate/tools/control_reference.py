"""Offline reference data for the open-loop control benchmark.

Solves the true-model problem with SciPy's SLSQP and builds initial input
sequences whose rollout cost is 6.81. Output is pasted into
`crates/core/src/problems/control_data.rs`.

Two instances are produced:
  * input bound 1.5 (the literal benchmark). The first input's first
    coordinate is pinned to -1.5 by the first state bound, so no strictly
    feasible sequence exists; the initial sequence sits on those two bounds
    and is strictly inside every other one.
  * input bound 1.6 (the relaxed benchmark). Same dynamics, same optimum,
    strictly feasible initial sequence.
"""
import numpy as np
from scipy.optimize import minimize, brentq

A = np.array([[1.1, 1.0], [-0.5, 1.1]])
X_INIT = np.array([1.0, 1.0])
N = 6
STATE_BOUND = 0.7
TARGET_COST = 6.81


def rollout(u):
    u = u.reshape(N, 2)
    x = X_INIT.copy()
    states, cost = [], 0.0
    for k in range(N):
        x = A @ x + u[k] + np.array([0.1 * x[1] ** 2, 0.0])
        states.append(x.copy())
        cost += 0.5 * x @ x + 2.0 * u[k] @ u[k]
    return np.array(states), cost


def slacks(u, input_bound):
    s = rollout(u)[0].ravel()
    return np.concatenate([STATE_BOUND - s, STATE_BOUND + s, input_bound - u, input_bound + u])


def solve(input_bound, margin, pinned=()):
    m = np.full(4 * 2 * N, margin)
    m[list(pinned)] = 0.0
    best = None
    rng = np.random.default_rng(0)
    for trial in range(30):
        u0 = rng.uniform(-1, 1, 2 * N) if trial else np.zeros(2 * N)
        r = minimize(lambda u: rollout(u)[1], u0, method="SLSQP",
                     constraints=[{"type": "ineq", "fun": lambda u: slacks(u, input_bound) - m}],
                     options={"ftol": 1e-15, "maxiter": 3000})
        if r.success and np.all(slacks(r.x, input_bound) - m >= -1e-10):
            if best is None or r.fun < best.fun:
                best = r
    return best


def initial_sequence(input_bound, pinned=()):
    """Max-margin sequence on the cost level set `TARGET_COST`."""
    opt = solve(input_bound, 0.0)
    keep = np.ones(4 * 2 * N, dtype=bool)
    keep[list(pinned)] = False
    # variables: (u, t); maximize t subject to slack >= t and cost == target
    cons = [
        {"type": "ineq", "fun": lambda z: slacks(z[:-1], input_bound)[keep] - z[-1]},
        {"type": "eq", "fun": lambda z: rollout(z[:-1])[1] - TARGET_COST},
    ]
    if pinned:
        cons.append({"type": "eq", "fun": lambda z: z[0] + input_bound})
    z0 = np.concatenate([opt.x, [0.0]])
    r = minimize(lambda z: -z[-1], z0, method="SLSQP", constraints=cons,
                 options={"ftol": 1e-14, "maxiter": 3000})
    u = np.round(r.x[:-1], 6)
    if pinned:
        u[0] = -input_bound
    return opt, u


fmt = lambda v, p: ", ".join(f"{x:.{p}f}" for x in v)

# row 0: x1[0] <= 0.7 ; row 36: u0[0] >= -1.5
opt, literal = initial_sequence(1.5, pinned=(0, 36))
print("optimum cost (bound 1.5)", repr(opt.fun))
print("OPTIMAL_INPUTS = [" + fmt(opt.x, 12) + "]")
print("LITERAL_INIT = [" + fmt(literal, 6) + "]")
print("  cost", repr(rollout(literal)[1]), "slacks", np.sort(slacks(literal, 1.5))[:4])

opt16, relaxed = initial_sequence(1.6)
print("optimum cost (bound 1.6)", repr(opt16.fun))
print("RELAXED_INIT = [" + fmt(relaxed, 6) + "]")
print("  cost", repr(rollout(relaxed)[1]), "min slack", slacks(relaxed, 1.6).min())
