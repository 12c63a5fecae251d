"""Reference values frozen into the C++ tests.

Computed independently of the library with SciPy: the HJB system is
integrated with an adaptive high-order ODE solver, and fixed Markov policies
are evaluated with matrix exponentials of the cost-augmented generator.
Run with `python3 tests/oracles/frozen_values.py`.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

ACTIONS = np.array([0.5, 1.0, 2.0])


def admission(n):
    q = np.zeros((len(ACTIONS), n, n))
    for a, u in enumerate(ACTIONS):
        for i in range(n):
            if i + 1 < n:
                q[a, i, i + 1] = 1.0
            if i > 0:
                q[a, i, i - 1] = u
            q[a, i, i] = -q[a, i].sum()
    f = np.array([[0.1 * i + 0.05 * u for u in ACTIONS] for i in range(n)])
    g = 0.2 * np.arange(n)
    return q, f, g


def hjb_value(q, f, g, horizon=1.0):
    def rhs(_, v):
        h = np.min(np.einsum("aij,j->ia", q, v) + f, axis=1)
        return h  # dV/d(T - t) = H(V)

    sol = solve_ivp(rhs, (0.0, horizon), g, method="DOP853", rtol=1e-13, atol=1e-15)
    return sol.y[:, -1]


def stationary_cost(q, f, g, actions, horizon=1.0):
    n = len(actions)
    aug = np.zeros((n + 1, n + 1))
    for i, a in enumerate(actions):
        aug[i, :n] = q[a, i]
        aug[i, n] = f[i, a]
    e = expm(aug * horizon)
    return e[:n, :n] @ g + e[:n, n]


def main():
    print("two-state V(0,1) =", float((1 - np.exp(-2.0)) / 2))
    print("two-state P(T)[1,2] =", float((1 - np.exp(-2.0)) / 2))
    for n in (4, 10):
        q, f, g = admission(n)
        v = hjb_value(q, f, g)
        print(f"admission n={n} V(0,.) =", [float(x) for x in v])
        policy = [0] + [2] * (n - 1)
        print(f"admission n={n} stationary (0.5, 2, ..., 2) cost =", [float(x) for x in stationary_cost(q, f, g, policy)])


if __name__ == "__main__":
    main()
